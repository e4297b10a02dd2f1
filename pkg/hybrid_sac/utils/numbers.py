import numpy as np


def format_number(value) -> str:
    """Shortest round-trip text for a CSV cell; never locale dependent."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def parse_number(text: str) -> float:
    """Inverse of :func:`format_number`; accepts ``nan`` and ``inf`` spellings."""
    t = text.strip()
    if not t:
        raise ValueError("empty numeric cell")
    return float(t)
