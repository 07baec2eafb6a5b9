"""Canonical JSON: floats at 12 significant digits, infinities as strings."""
import json
import math
from fractions import Fraction

import numpy as np

DIGITS = 12


def canonical(obj):
    """Round floats to 12 significant digits and make everything JSON-native."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        obj = float(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        r = float(f"{x:.{DIGITS}g}")
        return int(r) if r.is_integer() and abs(r) < 1e15 else r
    if isinstance(obj, complex):
        return [canonical(obj.real), canonical(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return str(obj)


def dumps(report: dict) -> str:
    return json.dumps(canonical(report), indent=2, ensure_ascii=False) + "\n"
