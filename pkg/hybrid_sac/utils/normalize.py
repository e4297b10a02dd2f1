import re


def normalize_name(name: str) -> str:
    """Lower-case identifier form: ``Platform-Lite`` and ``platform lite`` both become ``platform_lite``."""
    if not isinstance(name, str):
        return name
    s = name.strip().lower()
    s = re.sub(r"[\s\-]+", "_", s)
    return s


def dotted(*parts: str) -> str:
    return ".".join(p for p in parts if p)
