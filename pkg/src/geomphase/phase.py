"""Branch handling for phases.

Internally every phase lives in ``(-pi, pi]``. Exports use ``[0, 2pi)``.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2 * np.pi


def wrap_phase(x):
    """Map an angle (or array of angles) onto ``(-pi, pi]``."""
    y = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), TWO_PI)
    return float(y) if np.ndim(y) == 0 else y


def to_unit_circle_range(x, snap: float = 1e-12):
    """Map an angle onto ``[0, 2pi)``.

    Values within ``snap`` of 0 (mod 2pi) are written as exactly 0 so that a
    numerically-zero phase does not print as 6.28318530718.
    """
    y = np.mod(np.asarray(x, dtype=float), TWO_PI)
    y = np.where((y < snap) | (TWO_PI - y < snap), 0.0, y)
    return float(y) if np.ndim(y) == 0 else y


def phase_distance(a, b):
    """Distance between two angles on the circle, in ``[0, pi]``."""
    d = np.abs(np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), TWO_PI))
    d = np.minimum(d, TWO_PI - d)
    return float(d) if np.ndim(d) == 0 else d
