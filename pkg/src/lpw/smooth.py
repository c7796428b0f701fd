"""Smooth C-infinity transition profiles.

All cutoffs in the package (frequency rings, spatial bumps, low-frequency
parametrix cutoffs) are built from the same exp(-1/t) glue so that supports
are exact: the profiles are *identically* 0 / 1 outside the transition band,
not merely small.
"""

from __future__ import annotations

import numpy as np


def smooth_step(t):
    """C-infinity step: exactly 0 for t <= 0, exactly 1 for t >= 1.

    Uses s(t) = h(t) / (h(t) + h(1-t)) with h(t) = exp(-1/t).
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    if np.any(mid):
        tm = t[mid]
        with np.errstate(over="ignore"):
            a = np.exp(-1.0 / tm)
            b = np.exp(-1.0 / (1.0 - tm))
        out[mid] = a / (a + b)
    if out.ndim == 0:
        return float(out)
    return out


def ramp_down(r, r_one: float, r_zero: float):
    """Radial ramp: exactly 1 for r <= r_one, exactly 0 for r >= r_zero.

    Requires r_one < r_zero; smooth in between.
    """
    if not r_one < r_zero:
        raise ValueError(f"need r_one < r_zero, got {r_one} >= {r_zero}")
    return smooth_step((r_zero - np.asarray(r, dtype=float)) / (r_zero - r_one))


def ramp_up(r, r_zero: float, r_one: float):
    """Radial ramp: exactly 0 for r <= r_zero, exactly 1 for r >= r_one."""
    if not r_zero < r_one:
        raise ValueError(f"need r_zero < r_one, got {r_zero} >= {r_one}")
    return smooth_step((np.asarray(r, dtype=float) - r_zero) / (r_one - r_zero))
