"""Smooth one-dimensional profiles used to build bump functions on collars.

`bump` is the standard compactly supported bump on (-1, 1) with unit integral. `taper`
is the smoothstep obtained by integrating it: equal to 1 at 0, to 0 at 1, and monotone
in between. Every function here is vectorised over numpy arrays.
"""

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad

TAPER_TABLE_SIZE = 16_385


def _raw_bump(x: float) -> float:
    return math.exp(-1.0 / (1.0 - x * x)) if abs(x) < 1.0 else 0.0


@lru_cache(maxsize=1)
def bump_normalizer() -> float:
    """Constant N with N * integral of exp(-1 / (1 - x^2)) over (-1, 1) equal to 1."""
    mass, _ = quad(_raw_bump, -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return 1.0 / mass


def bump(x: np.ndarray | float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    safe = np.where(inside, x, 0.0)
    return np.where(inside, bump_normalizer() * np.exp(-1.0 / (1.0 - safe * safe)), 0.0)


def bump_derivative(x: np.ndarray | float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    safe = np.where(inside, x, 0.0)
    gap = 1.0 - safe * safe
    return np.where(inside, bump(safe) * (-2.0 * safe / (gap * gap)), 0.0)


def scaled_bump(s: np.ndarray | float, width: float) -> np.ndarray:
    """phi_eps(s) = phi(s / eps) / eps, supported on (-eps, eps) with unit integral."""
    return bump(np.asarray(s, dtype=float) / width) / width


def scaled_bump_derivative(s: np.ndarray | float, width: float) -> np.ndarray:
    return bump_derivative(np.asarray(s, dtype=float) / width) / (width * width)


@lru_cache(maxsize=1)
def _cumulative_table() -> tuple[np.ndarray, np.ndarray]:
    grid = np.linspace(-1.0, 1.0, TAPER_TABLE_SIZE)
    values = cumulative_trapezoid(bump(grid), grid, initial=0.0)
    return grid, values / values[-1]


def bump_cumulative(x: np.ndarray | float) -> np.ndarray:
    """Integral of `bump` from -1 to x."""
    grid, values = _cumulative_table()
    return np.interp(np.asarray(x, dtype=float), grid, values, left=0.0, right=1.0)


def taper(x: np.ndarray | float) -> np.ndarray:
    """psi(x) = 1 - Phi(2x - 1): 1 for x <= 0, 0 for x >= 1."""
    return 1.0 - bump_cumulative(2.0 * np.asarray(x, dtype=float) - 1.0)


def taper_derivative(x: np.ndarray | float) -> np.ndarray:
    return -2.0 * bump(2.0 * np.asarray(x, dtype=float) - 1.0)


def scaled_taper(t: np.ndarray | float, delta: float) -> np.ndarray:
    return taper(np.asarray(t, dtype=float) / delta)


def scaled_taper_derivative(t: np.ndarray | float, delta: float) -> np.ndarray:
    return taper_derivative(np.asarray(t, dtype=float) / delta) / delta
