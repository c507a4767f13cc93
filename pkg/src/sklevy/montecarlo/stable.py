"""Samplers for stable subordinators and subordinate Brownian increments."""
from __future__ import annotations

import numpy as np
from numba import njit


def _check_index(a):
    if not 0.0 < a < 1.0:
        raise ValueError(f"stable index must lie in (0, 1), got {a}")


def sample_stable_increment(gamma: float, t: float, rng: np.random.Generator, size=None):
    """Draw S_t of the gamma-stable subordinator with E exp(-lam S_t) = exp(-t lam^gamma).

    Kanter's representation: with U uniform on (0, pi) and E standard
    exponential, sin(gU)/sin(U)^(1/g) * (sin((1-g)U)/E)^((1-g)/g) is S_1.
    """
    _check_index(gamma)
    if not t > 0:
        raise ValueError("duration must be positive")
    u = np.pi * (1.0 - rng.random(size))        # in (0, pi]
    u = np.where(u >= np.pi, 0.5 * np.pi, u)
    e = rng.standard_exponential(size)
    g = gamma
    s1 = (np.sin(g * u) / np.sin(u) ** (1 / g)) * (np.sin((1 - g) * u) / e) ** ((1 - g) / g)
    return t ** (1 / g) * s1


def step_subordinate_bm(delta_phi: float, dt: float, rng: np.random.Generator, d: int = 2,
                        size=None):
    """One increment of Z over time dt: sqrt(2 S) N with S the delta_phi-stable clock."""
    S = sample_stable_increment(delta_phi, dt, rng, size)
    shape = (d,) if size is None else (np.shape(S) + (d,))
    N = rng.standard_normal(shape)
    return np.sqrt(2 * np.asarray(S))[..., None] * N if size is not None else np.sqrt(2 * S) * N


@njit(cache=True, nogil=True)
def stable1(a, rng):
    """S_1 for the a-stable subordinator (numba kernel version)."""
    u = np.pi * rng.random()
    while u == 0.0:
        u = np.pi * rng.random()
    e = rng.standard_exponential()
    return (np.sin(a * u) / np.sin(u) ** (1.0 / a)) * (np.sin((1.0 - a) * u) / e) ** ((1.0 - a) / a)
