"""Weyl functions of half-line restrictions and a reflectionless diagnostic.

The half-line restrictions to [k, infinity) and (-infinity, k] are obtained
by setting the coefficient just outside the cut to -1, which decouples the
straddling 2x2 block and keeps the restriction unitary; finite windows use
the same convention at the far end.  The Caratheodory-type functions

    m_plus(z, k)  =  <delta_k, (E_{+,k} + z)(E_{+,k} - z)^{-1} delta_k>
    m_minus(z, k) = -<delta_k, (E_{-,k} + z)(E_{-,k} - z)^{-1} delta_k>

have positive real part (respectively, positive real part after the sign
flip) on the open disk.  M_plus and M_minus are algebraic combinations of
these, and the reflectionless identity M_plus = -conj(M_minus) on the
spectrum is probed at finite radius r instead of through radial limits.

Every value is certified by recomputing on a doubled window; results that
move more than 1e-8 raise TruncationInstabilityError.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .coefficients import CoefficientSequence
from .errors import (
    NumericalInstabilityError,
    TruncationInstabilityError,
    WeylDenominatorError,
)
from .operator import banded_matvec, cmv_banded
from .spectral_sets import CircleArcSet

__all__ = [
    "CaratheodoryValue",
    "m_plus",
    "m_minus",
    "M_coefficients",
    "reflectionless_defect",
]

_EDGE_MARGIN = 1e-6
_STABILITY_TOL = 1e-8
_SIGN_SLACK = -1e-8


@dataclass(frozen=True)
class CaratheodoryValue:
    """One evaluated Weyl coefficient with its truncation metadata."""

    z: complex
    value: complex
    side: str  # "plus" | "minus"
    base_site: int
    truncation_dim: int

    def __post_init__(self):
        signed = self.value.real if self.side == "plus" else -self.value.real
        if signed < _SIGN_SLACK:
            raise NumericalInstabilityError(
                f"Caratheodory sign violated on side {self.side}: "
                f"Re = {self.value.real:.3e}"
            )


def _halfline_value(
    seq: CoefficientSequence, k: int, z: complex, dim: int, side: str
) -> complex:
    """<delta_k, (E + z)(E - z)^{-1} delta_k> on one half-line window."""
    if side == "plus":
        lo, hi, loc = k, k + dim - 1, 0
        cut_left, cut_right = k - 1, k + dim - 1
    else:
        lo, hi, loc = k - dim + 1, k, dim - 1
        cut_left, cut_right = k - dim, k

    def alpha(m: int) -> complex:
        if m == cut_left or m == cut_right:
            return -1.0 + 0j
        return seq(m)

    ab = cmv_banded(alpha, lo, hi)
    shifted = ab.copy()
    shifted[2, :] -= z  # main diagonal of E - z
    rhs = np.zeros(dim, dtype=complex)
    rhs[loc] = 1.0
    x = scipy.linalg.solve_banded((2, 2), shifted, rhs)
    y = banded_matvec(ab, x) + z * x  # (E + z) x
    return complex(y[loc])


def _certified(seq, k, z, dim, side) -> complex:
    v1 = _halfline_value(seq, k, z, dim, side)
    v2 = _halfline_value(seq, k, z, 2 * dim, side)
    if abs(v1 - v2) >= _STABILITY_TOL:
        raise TruncationInstabilityError(
            f"half-line value moved {abs(v1 - v2):.2e} when doubling the "
            f"window (dim {dim} -> {2 * dim}); move z away from the circle "
            "or enlarge dim"
        )
    return v1


def m_plus(
    seq: CoefficientSequence, k: int, z: complex, dim: int = 512
) -> CaratheodoryValue:
    """Weyl coefficient of the right half-line based at site k."""
    z = complex(z)
    if abs(z) >= 1.0 - _EDGE_MARGIN:
        raise ValueError(f"|z| must be below 1 - 1e-6, got {abs(z)}")
    if dim < 4:
        raise ValueError(f"dim must be at least 4, got {dim}")
    val = _certified(seq, k, z, dim, "plus")
    return CaratheodoryValue(z=z, value=val, side="plus", base_site=k,
                             truncation_dim=dim)


def m_minus(
    seq: CoefficientSequence, k: int, z: complex, dim: int = 512
) -> CaratheodoryValue:
    """Weyl coefficient of the left half-line based at site k (sign-flipped)."""
    z = complex(z)
    if abs(z) >= 1.0 - _EDGE_MARGIN:
        raise ValueError(f"|z| must be below 1 - 1e-6, got {abs(z)}")
    if dim < 4:
        raise ValueError(f"dim must be at least 4, got {dim}")
    val = -_certified(seq, k, z, dim, "minus")
    return CaratheodoryValue(z=z, value=val, side="minus", base_site=k,
                             truncation_dim=dim)


def _m_minus_to_M(alpha_k: complex, m2: complex) -> complex:
    one_minus = 1.0 - alpha_k.conjugate()
    one_plus = 1.0 + alpha_k.conjugate()
    num = one_minus.real + 1j * one_plus.imag * m2
    den = 1j * one_minus.imag + one_plus.real * m2
    if abs(den) < 1e-12:
        raise WeylDenominatorError(
            f"M_minus denominator is numerically zero (|den| = {abs(den):.2e})"
        )
    return num / den


def M_coefficients(
    seq: CoefficientSequence, k: int, z: complex, dim: int = 512
) -> tuple[complex, complex]:
    """The pair (M_plus, M_minus) at (z, k)."""
    mp = m_plus(seq, k - 1, z, dim).value
    m2 = m_minus(seq, k - 2, z, dim).value
    return mp, _m_minus_to_M(complex(seq(k)), m2)


def reflectionless_defect(
    seq: CoefficientSequence,
    k: int,
    S: CircleArcSet,
    r: float,
    samples: int = 32,
    dim: int = 512,
) -> float:
    """max over sampled angles in S of |M_plus + conj(M_minus)| at radius r.

    A finite-radius surrogate for the reflectionless boundary identity;
    smaller is closer to reflectionless on S.
    """
    if not 0.9 <= r < 1.0:
        raise ValueError(f"r must lie in [0.9, 1), got {r}")
    if samples < 16:
        raise ValueError(f"samples must be at least 16, got {samples}")
    if S.is_empty():
        raise ValueError("sample set is empty")
    angles = S.sample(samples)

    worst = 0.0
    for th in angles:
        z = r * cmath.exp(1j * th)
        mp, mm = M_coefficients(seq, k, z, dim)
        worst = max(worst, abs(mp + mm.conjugate()))
    return worst
