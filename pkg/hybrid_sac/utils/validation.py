"""Checks applied to tables before they are written or re-read."""
from __future__ import annotations

import math
from typing import Mapping


def first_non_finite(row: Mapping[str, float]) -> str | None:
    """Name of the first column holding NaN or infinity, if any."""
    for key, value in row.items():
        if isinstance(value, (int, float)) and not math.isfinite(float(value)):
            return key
    return None
