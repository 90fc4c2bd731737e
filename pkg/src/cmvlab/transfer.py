"""Transfer cocycles and Lyapunov exponents.

Two one-step 2x2 cocycles over a coefficient sequence:

* the Szego step  S(alpha, z) = (1/rho) [[z, -conj(alpha)], [-z*alpha, 1]],
  with det S = z, so |det S| = 1 on the unit circle;
* the Gesztesy-Zinchenko step Y(n, z), of determinant -1, whose ordered
  product over one (even) period is the monodromy matrix with real trace
  and determinant +1.

The Lyapunov exponent is the per-step exponential growth rate of the Szego
products.  For sequences with period metadata it short-circuits to the exact
formula log(spectral radius of the monodromy) / period; otherwise a rescaled
Birkhoff product along the orbit is used.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coefficients import CoefficientSequence
from .spectral_sets import CircleArcSet, TWO_PI

__all__ = [
    "CocycleStep",
    "szego",
    "gz_step",
    "monodromy",
    "lyapunov",
    "estimate_Z",
    "arcs_from_grid",
]

_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class CocycleStep:
    """One labelled step of a transfer cocycle (bookkeeping value)."""

    kind: str  # "szego" | "gz_even" | "gz_odd"
    matrix: np.ndarray
    z: complex
    site: int

    def det_residual(self) -> float:
        """Deviation of det(matrix) from its contract value."""
        d = complex(np.linalg.det(self.matrix))
        if self.kind == "szego":
            return abs(abs(d) - 1.0)
        return abs(d + 1.0)


def _require_disk(alpha: complex) -> complex:
    alpha = complex(alpha)
    if abs(alpha) >= 1.0:
        raise ValueError(f"|alpha| must be < 1, got {abs(alpha)}")
    return alpha


def szego(alpha: complex, z: complex) -> np.ndarray:
    """Szego one-step matrix (1/rho) [[z, -conj(a)], [-z a, 1]]."""
    alpha = _require_disk(alpha)
    z = complex(z)
    if z == 0:
        raise ValueError("z must be nonzero")
    rho = math.sqrt(1.0 - abs(alpha) ** 2)
    return np.array(
        [[z, -alpha.conjugate()], [-z * alpha, 1.0]], dtype=complex
    ) / rho


def gz_step(seq: CoefficientSequence, n: int, z: complex) -> np.ndarray:
    """Gesztesy-Zinchenko one-step matrix Y(n, z); parity of n picks the form."""
    z = complex(z)
    if z == 0:
        raise ValueError("z must be nonzero")
    a = _require_disk(seq(n))
    rho = math.sqrt(1.0 - abs(a) ** 2)
    if n % 2 == 0:
        m = np.array([[-a, 1.0], [1.0, -a.conjugate()]], dtype=complex)
    else:
        m = np.array([[-a.conjugate(), z], [1.0 / z, -a]], dtype=complex)
    return m / rho


def monodromy(seq: CoefficientSequence, q: int, z: complex) -> np.ndarray:
    """Ordered product Y(q-1, z) ... Y(0, z) for even q."""
    if q < 2 or q % 2 != 0:
        raise ValueError(f"q must be a positive even integer, got {q}")
    m = np.eye(2, dtype=complex)
    for n in range(q):
        m = gz_step(seq, n, z) @ m
    return m


def _spectral_radius_2x2(m: np.ndarray) -> float:
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = cmath.sqrt(tr * tr - 4.0 * det)
    return max(abs((tr + disc) / 2.0), abs((tr - disc) / 2.0))


def _exact_periodic_lyapunov(seq: CoefficientSequence, z: complex) -> float:
    q = seq.period
    if q % 2:
        q *= 2
    rad = _spectral_radius_2x2(monodromy(seq, q, z))
    return math.log(max(rad, 1.0)) / q


def lyapunov(
    seq: CoefficientSequence,
    z: complex,
    n_steps: int = 100_000,
    scale_every: int = 16,
) -> float:
    """Per-step growth rate of the Szego cocycle at |z| = 1.

    Periodic sequences use the exact monodromy formula (n_steps is then
    irrelevant); otherwise the Birkhoff product over n_steps sites is formed
    with periodic rescaling by the max-abs entry to avoid overflow.
    """
    z = complex(z)
    if abs(abs(z) - 1.0) > _UNIT_TOL:
        raise ValueError(f"|z| must be 1, got {abs(z)}")
    if seq.period is not None:
        return _exact_periodic_lyapunov(seq, z)
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if scale_every < 1:
        raise ValueError(f"scale_every must be >= 1, got {scale_every}")

    # unrolled 2x2 product: a c / b d columns as scalars
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    log_scale = 0.0
    for n in range(n_steps):
        al = seq(n)
        rho = math.sqrt(1.0 - (al.real * al.real + al.imag * al.imag))
        za = z * al
        a, b, c, d = (
            (z * a - al.conjugate() * c) / rho,
            (z * b - al.conjugate() * d) / rho,
            (-za * a + c) / rho,
            (-za * b + d) / rho,
        )
        if (n + 1) % scale_every == 0:
            s = max(abs(a), abs(b), abs(c), abs(d))
            if s > 0:
                a, b, c, d = a / s, b / s, c / s, d / s
                log_scale += math.log(s)
    norm = np.linalg.norm(np.array([[a, b], [c, d]]), 2)
    return (log_scale + math.log(norm)) / n_steps


def arcs_from_grid(
    angles: Sequence[float], values: Sequence[float], eps_L: float
) -> CircleArcSet:
    """Arcs spanned by cyclically consecutive grid points with value < eps_L."""
    angles = np.asarray(angles, dtype=float)
    values = np.asarray(values, dtype=float)
    if angles.shape != values.shape or angles.ndim != 1 or angles.size == 0:
        raise ValueError("angles and values must be matching nonempty 1-d arrays")
    below = values < eps_L
    if np.all(below):
        return CircleArcSet.full_circle()
    if not np.any(below):
        return CircleArcSet.empty()
    n = angles.size
    # cyclic runs of marked points
    arcs = []
    start = None
    first_run_wraps = below[0] and below[-1]
    for i in range(n):
        if below[i] and start is None:
            start = i
        if start is not None and (i == n - 1 or not below[i + 1]):
            if below[i]:
                arcs.append((start, i))
                start = None
    if first_run_wraps and len(arcs) >= 2:
        s_last, e_last = arcs.pop()
        s_first, e_first = arcs.pop(0)
        arcs.append((s_last, e_first + n))
    out = []
    for s, e in arcs:
        lo = angles[s % n]
        hi = angles[e % n] + (TWO_PI if e >= n else 0.0)
        out.append((lo, hi))
    return CircleArcSet.from_arcs(out)


def estimate_Z(
    seq: CoefficientSequence,
    grid: Sequence[complex],
    n_steps: int = 100_000,
    eps_L: float = 1e-2,
) -> CircleArcSet:
    """Estimate the vanishing set of the Lyapunov exponent on a grid.

    The grid must be sorted by angle; arcs span maximal cyclic runs of grid
    points whose Lyapunov estimate falls below eps_L.  Estimates more negative
    than -eps_L / 10 trigger a warning (n_steps too small).
    """
    if eps_L <= 0:
        raise ValueError(f"eps_L must be positive, got {eps_L}")
    zs = np.asarray(grid, dtype=complex)
    if zs.ndim != 1 or zs.size < 1:
        raise ValueError("grid must be a nonempty 1-d array of unit-modulus points")
    angles = np.angle(zs) % TWO_PI
    if np.any(np.diff(angles) < 0):
        raise ValueError("grid must be sorted by angle")
    vals = np.array([lyapunov(seq, z, n_steps) for z in zs])
    if np.any(vals < -eps_L / 10.0):
        warnings.warn(
            "Lyapunov estimates below -eps_L/10; increase n_steps",
            RuntimeWarning,
            stacklevel=2,
        )
    return arcs_from_grid(angles, vals, eps_L)
