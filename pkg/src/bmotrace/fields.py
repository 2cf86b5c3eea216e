"""Seeded random test fields and quantization helpers.

Generators evaluate analytic formulas at arbitrary points, so the same
spec sampled on two grids gives the same underlying function.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["random_scalar_points", "random_scalar_field",
           "random_vector_field", "dyadic_quantize"]


def random_scalar_points(pts: np.ndarray, seed: int, n_modes: int = 3,
                         amplitude: float = 1.0) -> np.ndarray:
    """Low-frequency random trig polynomial at the given points."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    rng = np.random.default_rng(seed)
    nd = pts.shape[1]
    waves = rng.integers(1, 4, size=(n_modes, nd)).astype(np.float64)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=n_modes)
    amps = rng.uniform(-amplitude, amplitude, size=n_modes)
    out = np.zeros(pts.shape[0])
    for m in range(n_modes):
        out += amps[m] * np.sin(pts @ waves[m] + phases[m])
    return out


def random_scalar_field(grid, seed: int, n_modes: int = 3,
                        amplitude: float = 1.0) -> np.ndarray:
    """Scalar field sampled on a grid, reshaped to the grid shape."""
    return random_scalar_points(grid.centers(), seed, n_modes,
                                amplitude).reshape(grid.shape)


def random_vector_field(grid, seed: int, n_modes: int = 3,
                        amplitude: float = 1.0) -> list:
    """One random scalar per component, independently seeded."""
    return [random_scalar_field(grid, seed * 1009 + k, n_modes, amplitude)
            for k in range(grid.dim)]


def dyadic_quantize(arr: np.ndarray, bits: int = 20) -> np.ndarray:
    """Round to multiples of 2^-bits; sums and power-of-two means of
    such values are exact in doubles, which makes linearity checks
    bit-exact rather than approximate."""
    q = 2.0 ** -bits
    return np.round(np.asarray(arr, dtype=np.float64) / q) * q
