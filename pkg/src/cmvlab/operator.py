"""Pentadiagonal unitary windows built from Verblunsky coefficients.

A two-sided CMV operator factors as E = L * M where L and M are direct sums
of 2x2 unitary blocks

    Theta(alpha) = [[conj(alpha), rho], [rho, -alpha]],   rho = sqrt(1-|alpha|^2),

with the block for alpha_n acting on coordinates (n, n+1): even n in L, odd n
in M.  Finite windows use one of three boundary conventions:

* ``periodic_wrap``   - the block at the last odd index wraps around; the
                        window is unitary and equals the twisted restriction
                        at Floquet phase k = 0.
* ``half_line_left``  - offset 0 with alpha_{-1} = -1; the coefficient at the
                        right cut is also set to -1 so the window stays
                        unitary.
* ``raw_cut``         - plain entrywise restriction, generally not unitary;
                        used for resolvent experiments only.

All window objects are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coefficients import CoefficientSequence, periodic_table_seq

__all__ = [
    "BandedUnitary",
    "BOUNDARIES",
    "theta",
    "assemble_lm",
    "assemble_cmv",
    "sieve",
    "shift_seq",
    "verify_sieve_square",
    "norm_diff",
    "cmv_banded",
    "banded_matvec",
    "matrix_to_json",
    "matrix_from_json",
    "nonzero_rows",
]

BOUNDARIES = ("periodic_wrap", "half_line_left", "raw_cut")


@dataclass(frozen=True)
class BandedUnitary:
    """A dense window of a pentadiagonal unitary with an index offset."""

    offset: int
    entries: np.ndarray
    boundary: str

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=complex)
        if ent.ndim != 2 or ent.shape[0] != ent.shape[1]:
            raise ValueError(f"entries must be square, got shape {ent.shape}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")
        n = ent.shape[0]
        i, j = np.indices((n, n))
        dist = np.abs(i - j)
        if self.boundary == "periodic_wrap":
            dist = np.minimum(dist, n - dist)
        off_band = np.abs(ent[dist > 2])
        if off_band.size and off_band.max() > 1e-14:
            raise ValueError(
                f"entries outside the pentadiagonal band (max {off_band.max():.2e})"
            )
        ent = ent.copy()
        ent.flags.writeable = False
        object.__setattr__(self, "entries", ent)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def unitarity_residual(self) -> float:
        """max |U U* - I|."""
        n = self.dim
        g = self.entries @ self.entries.conj().T
        return float(np.max(np.abs(g - np.eye(n))))


def theta(alpha: complex) -> np.ndarray:
    """The 2x2 unitary symmetric block [[conj(a), rho], [rho, -a]]."""
    alpha = complex(alpha)
    if abs(alpha) >= 1.0:
        raise ValueError(f"|alpha| must be < 1, got {abs(alpha)}")
    rho = math.sqrt(1.0 - abs(alpha) ** 2)
    return np.array([[alpha.conjugate(), rho], [rho, -alpha]], dtype=complex)


def _check_window(offset: int, dim: int, boundary: str) -> None:
    if boundary not in ("periodic_wrap", "half_line_left"):
        raise ValueError(
            "L/M assembly needs a blockwise boundary: periodic_wrap or half_line_left"
        )
    if offset % 2 != 0:
        raise ValueError(f"offset must be even, got {offset}")
    if dim < 2 or dim % 2 != 0:
        raise ValueError(f"dim must be a positive even integer, got {dim}")
    if boundary == "half_line_left" and offset != 0:
        raise ValueError("half_line_left requires offset 0")


def assemble_lm(
    seq: CoefficientSequence, offset: int, dim: int, boundary: str = "periodic_wrap"
) -> tuple[BandedUnitary, BandedUnitary]:
    """The factors L (blocks at even sites) and M (blocks at odd sites).

    With ``periodic_wrap`` the block for the last odd site wraps its corner
    entries around; with ``half_line_left`` the coefficients just outside both
    cuts are taken to be -1, which turns the straddling blocks into diagonal
    unimodular entries.
    """
    _check_window(offset, dim, boundary)
    L = np.zeros((dim, dim), dtype=complex)
    M = np.zeros((dim, dim), dtype=complex)

    for s in range(offset, offset + dim, 2):
        i = s - offset
        L[i : i + 2, i : i + 2] = theta(seq(s))

    for s in range(offset + 1, offset + dim - 1, 2):
        i = s - offset
        M[i : i + 2, i : i + 2] = theta(seq(s))

    last = offset + dim - 1  # odd
    if boundary == "periodic_wrap":
        a = complex(seq(last))
        rho = math.sqrt(1.0 - abs(a) ** 2)
        M[dim - 1, dim - 1] = a.conjugate()
        M[dim - 1, 0] = rho
        M[0, dim - 1] = rho
        M[0, 0] = -a
    else:  # half_line_left: alpha_{-1} = alpha_{dim-1} = -1
        M[0, 0] = 1.0
        M[dim - 1, dim - 1] = -1.0

    return (
        BandedUnitary(offset, L, boundary),
        BandedUnitary(offset, M, boundary),
    )


def assemble_cmv(
    seq: CoefficientSequence, offset: int, dim: int, boundary: str = "periodic_wrap"
) -> BandedUnitary:
    """The windowed CMV operator L @ M."""
    L, M = assemble_lm(seq, offset, dim, boundary)
    return BandedUnitary(offset, L.entries @ M.entries, boundary)


def sieve(seq: CoefficientSequence) -> CoefficientSequence:
    """Interleave zeros: result(2j) = 0 and result(2j-1) = seq(j)."""
    if seq.period is not None:
        p = seq.period
        vals = [0j if m % 2 == 0 else seq((m + 1) // 2) for m in range(2 * p)]
        return periodic_table_seq(vals)
    return CoefficientSequence(
        fn=lambda m: 0j if m % 2 == 0 else seq((m + 1) // 2),
        sup_norm_bound=seq.sup_norm_bound,
        period=None,
        spec=None,
    )


def shift_seq(seq: CoefficientSequence, by: int) -> CoefficientSequence:
    """The translated sequence n -> seq(n + by)."""
    if seq.period is not None:
        return periodic_table_seq([seq(j + by) for j in range(seq.period)])
    return CoefficientSequence(
        fn=lambda n: seq(n + by),
        sup_norm_bound=seq.sup_norm_bound,
        period=None,
        spec=None,
    )


def verify_sieve_square(seq: CoefficientSequence, dim: int) -> dict:
    """Residuals for the block structure of the squared sieved operator.

    The square of the sieved operator leaves the mod-4 index classes {0, 3}
    and {1, 2} invariant; on the first class it acts as the CMV operator of
    the one-step-shifted sequence, and on the second as its transpose.
    Returns the leakage residuals of the two invariant subspaces and the
    entrywise similarity residual.
    """
    if dim % 4 != 0 or dim <= 0:
        raise ValueError(f"dim must be a positive multiple of 4, got {dim}")
    hat = assemble_cmv(sieve(seq), 0, dim, "periodic_wrap")
    W = hat.entries @ hat.entries

    idx = np.arange(dim)
    x_mask = (idx % 4 == 0) | (idx % 4 == 3)
    y_mask = ~x_mask
    ix = idx[x_mask]
    iy = idx[y_mask]

    x_res = float(np.max(np.abs(W[np.ix_(iy, ix)])))
    y_res = float(np.max(np.abs(W[np.ix_(ix, iy)])))

    ref = assemble_cmv(shift_seq(seq, 1), 0, dim // 2, "periodic_wrap").entries
    wx = W[np.ix_(ix, ix)]
    wy = W[np.ix_(iy, iy)]
    sim = max(
        float(np.max(np.abs(wx - ref))),
        float(np.max(np.abs(wy.T - ref))),
    )
    return {
        "X_invariant_residual": x_res,
        "Y_invariant_residual": y_res,
        "similarity_residual": sim,
    }


def norm_diff(
    seq1: CoefficientSequence,
    seq2: CoefficientSequence,
    dim: int,
    boundary: str = "periodic_wrap",
    require_exact: bool = True,
) -> float:
    """Operator norm of the windowed difference of two CMV operators.

    For two periodic sequences on a periodic-wrap window spanning a whole
    common period the value is the exact k = 0 Floquet norm of the
    difference; ``require_exact`` enforces that the window is such a
    multiple.
    """
    if require_exact:
        if boundary != "periodic_wrap":
            raise ValueError("exact evaluation needs a periodic_wrap window")
        if seq1.period is None or seq2.period is None:
            raise ValueError("exact evaluation needs two periodic sequences")
        common = math.lcm(seq1.period, seq2.period)
        if common % 2:
            common *= 2
        if dim < common or dim % common != 0:
            raise ValueError(
                f"window dim {dim} must be a multiple of the common period {common}"
            )
    e1 = assemble_cmv(seq1, 0, dim, boundary)
    e2 = assemble_cmv(seq2, 0, dim, boundary)
    return float(np.linalg.norm(e1.entries - e2.entries, 2))


# ---------------------------------------------------------------------------
# direct pentadiagonal construction (banded storage)
# ---------------------------------------------------------------------------

def cmv_banded(
    alpha: Callable[[int], complex], lo: int, hi: int
) -> np.ndarray:
    """Banded (ab-form) CMV truncation to global indices [lo, hi].

    Entries come straight from the row formulas of the pentadiagonal matrix;
    couplings across the cuts vanish whenever |alpha(lo-1)| = |alpha(hi)| = 1,
    which is how the unitary half-line truncations are produced.  Returns the
    (5, n) diagonal-ordered form used by scipy.linalg.solve_banded with
    (l, u) = (2, 2): row u + i - j holds entry (i, j).
    """
    n = hi - lo + 1
    if n < 1:
        raise ValueError("window must contain at least one site")

    a = {m: complex(alpha(m)) for m in range(lo - 2, hi + 3)}
    r = {m: math.sqrt(max(0.0, 1.0 - abs(v) ** 2)) for m, v in a.items()}

    ab = np.zeros((5, n), dtype=complex)

    def put(i: int, j: int, v: complex) -> None:
        if lo <= j <= hi and v != 0:
            ab[2 + (i - lo) - (j - lo), j - lo] = v

    for g in range(lo, hi + 1):
        if g % 2 == 0:
            put(g, g - 1, a[g].conjugate() * r[g - 1])
            put(g, g, -a[g].conjugate() * a[g - 1])
            put(g, g + 1, a[g + 1].conjugate() * r[g])
            put(g, g + 2, r[g + 1] * r[g])
        else:
            put(g, g - 2, r[g - 1] * r[g - 2])
            put(g, g - 1, -r[g - 1] * a[g - 2])
            put(g, g, -a[g].conjugate() * a[g - 1])
            put(g, g + 1, -r[g] * a[g - 1])
    return ab


def banded_matvec(ab: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y = A x for a (5, n) diagonal-ordered pentadiagonal matrix."""
    n = ab.shape[1]
    y = np.zeros(n, dtype=complex)
    for d in range(-2, 3):
        # ab[2 + d, j] holds entry (j + d, j)
        row = ab[2 + d]
        if d >= 0:
            y[d:] += row[: n - d] * x[: n - d]
        else:
            y[: n + d] += row[-d:] * x[-d:]
    return y


# ---------------------------------------------------------------------------
# import/export
# ---------------------------------------------------------------------------

def matrix_to_json(U: BandedUnitary) -> dict:
    return {
        "offset": U.offset,
        "dim": U.dim,
        "boundary": U.boundary,
        "entries": [[v.real, v.imag] for v in U.entries.ravel()],
    }


def matrix_from_json(d: dict) -> BandedUnitary:
    dim = int(d["dim"])
    flat = np.array([complex(re, im) for re, im in d["entries"]], dtype=complex)
    if flat.size != dim * dim:
        raise ValueError(f"expected {dim * dim} entries, got {flat.size}")
    return BandedUnitary(int(d["offset"]), flat.reshape(dim, dim), d["boundary"])


def nonzero_rows(U: BandedUnitary, tol: float = 0.0) -> list[tuple[int, int, float, float]]:
    """Rows (i, j, re, im) of nonzero entries in global indices."""
    out = []
    for i in range(U.dim):
        for j in range(U.dim):
            v = U.entries[i, j]
            if abs(v) > tol:
                out.append((U.offset + i, U.offset + j, v.real, v.imag))
    return out
