"""Floquet theory for periodic CMV operators.

For a q-periodic sequence (q even) the twisted q x q restriction factors as
E_q(k) = L_q M_q(k), where L_q stacks the even-index 2x2 blocks and M_q(k)
carries the odd interior blocks plus corner entries -alpha_{q-1},
conj(alpha_{q-1}) on the diagonal and rho_{q-1} e^{-+ i k q} in the corners.
Its eigenvalues z_n(k) sweep out the spectral bands; the analytic band
velocity has the closed form

    dz/dk = i q rho_{q-1} [conj(v(-1)) u(0) - conj(v(0)) u(-1)],

with v = L_q^{-1} u and the Floquet extension u(-1) = e^{-ikq} u(q-1).
Bands are alternatively characterized by the discriminant: z belongs to the
spectrum iff the (real) monodromy trace lies in [-2, 2], and eigenvalues of
E_q(k) are exactly the roots of trace = 2 cos(qk).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .coefficients import CoefficientSequence
from .errors import DegenerateBandError, NumericalInstabilityError
from .spectral_sets import CircleArcSet, TWO_PI
from .transfer import monodromy

__all__ = [
    "FloquetEigenpair",
    "floquet_blocks",
    "floquet_operator",
    "band_eigens",
    "band_derivative",
    "periodic_spectrum",
    "band_arcs_from_kgrid",
    "monodromy_bound_check",
    "discriminant",
]

_GAP_TOL = 1e-8


@dataclass(frozen=True)
class FloquetEigenpair:
    """Eigenpair of the twisted restriction: E_q(k) u = z u, v = L_q^{-1} u."""

    k: float
    z: complex
    u: np.ndarray
    v: np.ndarray


def _check_q(seq: CoefficientSequence, q: int) -> None:
    if q < 2 or q % 2 != 0:
        raise ValueError(f"q must be a positive even integer, got {q}")
    if seq.period is None:
        raise ValueError("sequence must carry period metadata")
    if q % seq.period != 0:
        raise ValueError(
            f"sequence period {seq.period} must divide q = {q}"
        )


def floquet_blocks(
    seq: CoefficientSequence, q: int, k: float
) -> tuple[np.ndarray, np.ndarray]:
    """The q x q factors L_q and M_q(k)."""
    _check_q(seq, q)
    k = float(k)
    L = np.zeros((q, q), dtype=complex)
    M = np.zeros((q, q), dtype=complex)
    for s in range(0, q, 2):
        a = complex(seq(s))
        rho = math.sqrt(1.0 - abs(a) ** 2)
        L[s, s] = a.conjugate()
        L[s, s + 1] = rho
        L[s + 1, s] = rho
        L[s + 1, s + 1] = -a
    for s in range(1, q - 1, 2):
        a = complex(seq(s))
        rho = math.sqrt(1.0 - abs(a) ** 2)
        M[s, s] = a.conjugate()
        M[s, s + 1] = rho
        M[s + 1, s] = rho
        M[s + 1, s + 1] = -a
    a = complex(seq(q - 1))
    rho = math.sqrt(1.0 - abs(a) ** 2)
    M[0, 0] = -a
    M[0, q - 1] = rho * cmath.exp(-1j * k * q)
    M[q - 1, 0] = rho * cmath.exp(1j * k * q)
    M[q - 1, q - 1] = a.conjugate()
    return L, M


def floquet_operator(seq: CoefficientSequence, q: int, k: float) -> np.ndarray:
    L, M = floquet_blocks(seq, q, k)
    return L @ M


def band_eigens(
    seq: CoefficientSequence, q: int, k: float
) -> list[FloquetEigenpair]:
    """All q eigenpairs at strictly interior k, sorted by eigenvalue angle.

    Interior k keeps the eigenvalues simple; pairs closer than 1e-8 are
    reported through DegenerateBandError instead of being returned silently.
    """
    _check_q(seq, q)
    k = float(k)
    if not 0.0 < k < math.pi / q:
        raise ValueError(f"k must lie strictly inside (0, pi/q), got {k}")
    L, M = floquet_blocks(seq, q, k)
    E = L @ M
    # Schur of a normal matrix: diagonal T, orthonormal eigenvectors.
    T, Zs = scipy.linalg.schur(E, output="complex")
    w = np.diag(T)
    order = np.argsort(np.angle(w) % TWO_PI)
    w = w[order]
    vecs = Zs[:, order]

    gaps = np.abs(w - np.roll(w, -1))
    if w.size > 1 and gaps.min() < _GAP_TOL:
        i = int(np.argmin(gaps))
        raise DegenerateBandError(k, float(gaps[i]))

    pairs = []
    Linv = L.conj().T
    for i in range(q):
        u = vecs[:, i]
        resid = np.linalg.norm(E @ u - w[i] * u)
        if resid > 1e-10:
            raise NumericalInstabilityError(
                f"eigenpair residual {resid:.2e} exceeds 1e-10"
            )
        v = Linv @ u
        v = v / np.linalg.norm(v)
        pairs.append(FloquetEigenpair(k=k, z=complex(w[i]), u=u.copy(), v=v))
    return pairs


def band_derivative(
    pair: FloquetEigenpair, seq: CoefficientSequence, q: int
) -> complex:
    """Analytic band velocity dz/dk at the eigenpair's (k, z)."""
    _check_q(seq, q)
    a = complex(seq(q - 1))
    rho = math.sqrt(1.0 - abs(a) ** 2)
    phase = cmath.exp(-1j * pair.k * q)
    u_m1 = phase * pair.u[q - 1]
    v_m1 = phase * pair.v[q - 1]
    return 1j * q * rho * (
        v_m1.conjugate() * pair.u[0] - pair.v[0].conjugate() * u_m1
    )


def discriminant(seq: CoefficientSequence, q: int, theta: float) -> float:
    """Real monodromy trace at z = exp(i*theta); imaginary part must vanish."""
    tr = complex(np.trace(monodromy(seq, q, cmath.exp(1j * theta))))
    if abs(tr.imag) > 1e-10 * max(1.0, abs(tr.real)):
        raise NumericalInstabilityError(
            f"monodromy trace has imaginary part {tr.imag:.2e}"
        )
    return tr.real


def _bisect_edge(f, lo: float, hi: float, tol: float) -> float:
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (flo <= 0) == (fm <= 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def periodic_spectrum(
    seq: CoefficientSequence,
    q: int,
    resolution: int = 4096,
    angle_tol: float = 1e-10,
    cross_validate: bool = True,
    k_points: int = 129,
) -> CircleArcSet:
    """Band arcs {z on the circle : trace of the monodromy in [-2, 2]}.

    Band edges are located by bisection on the discriminant to ``angle_tol``;
    the result is cross-validated against the union of twisted-restriction
    eigenvalues over a k-grid, warning when the two methods drift apart by
    more than ten grid cells.
    """
    _check_q(seq, q)
    if resolution < 8:
        raise ValueError(f"resolution must be at least 8, got {resolution}")
    thetas = np.linspace(0.0, TWO_PI, resolution, endpoint=False)
    disc = np.array([discriminant(seq, q, t) for t in thetas])

    edges = []
    for level in (2.0, -2.0):
        g = disc - level
        for i in range(resolution):
            j = (i + 1) % resolution
            a, b = thetas[i], thetas[i] + (thetas[1] - thetas[0])
            if (g[i] <= 0) != (g[j] <= 0):
                edges.append(
                    _bisect_edge(
                        lambda t, lv=level: discriminant(seq, q, t) - lv,
                        a, b, angle_tol,
                    )
                    % TWO_PI
                )
    # classification slack: keeps hairline cells produced by tangential
    # discriminant touches (closed gaps) inside the band set
    slack = 1e-12
    if not edges:
        inside = np.abs(disc) <= 2.0 + slack
        result = CircleArcSet.full_circle() if inside.all() else CircleArcSet.empty()
    else:
        edges = sorted(edges)
        cells = []
        m = len(edges)
        for i in range(m):
            lo = edges[i]
            hi = edges[(i + 1) % m] + (TWO_PI if i == m - 1 else 0.0)
            mid = 0.5 * (lo + hi)
            if abs(discriminant(seq, q, mid % TWO_PI)) <= 2.0 + slack:
                cells.append((lo, hi))
        result = CircleArcSet.from_arcs(cells) if cells else CircleArcSet.empty()

    if cross_validate:
        other = band_arcs_from_kgrid(seq, q, k_points)
        dh = result.hausdorff(other)
        if dh > 10.0 * (TWO_PI / resolution):
            warnings.warn(
                f"discriminant and k-grid band sets disagree (Hausdorff {dh:.2e})",
                RuntimeWarning,
                stacklevel=2,
            )
    return result


def band_arcs_from_kgrid(
    seq: CoefficientSequence, q: int, k_points: int = 129
) -> CircleArcSet:
    """Band arcs swept by the eigenvalues of E_q(k) over [0, pi/q].

    Branches are threaded across the k-grid by nearest-eigenvalue assignment;
    each branch moves monotonically in angle inside a band, so its swept arc
    runs between its unwrapped extremes.
    """
    _check_q(seq, q)
    if k_points < 2:
        raise ValueError(f"k_points must be at least 2, got {k_points}")
    ks = np.linspace(0.0, math.pi / q, k_points)
    prev = None
    tracks = None
    for k in ks:
        w = np.linalg.eigvals(floquet_operator(seq, q, k))
        if prev is None:
            order = np.argsort(np.angle(w) % TWO_PI)
            w = w[order]
            tracks = [[float(np.angle(z) % TWO_PI)] for z in w]
        else:
            cost = np.abs(prev[:, None] - w[None, :])
            rows, cols = scipy.optimize.linear_sum_assignment(cost)
            w = w[cols[np.argsort(rows)]]
            for i, z in enumerate(w):
                last = tracks[i][-1]
                ang = float(np.angle(z))
                # unwrap to the closest representative of the new angle
                ang += TWO_PI * round((last - ang) / TWO_PI)
                tracks[i].append(ang)
        prev = w
    arcs = []
    for tr in tracks:
        lo, hi = min(tr), max(tr)
        arcs.append((lo, hi))
    return CircleArcSet.from_arcs(arcs)


def monodromy_bound_check(
    seq: CoefficientSequence, q: int, z: complex
) -> dict:
    """Verify ||Phi_q(z)|| <= 4 q / |dz/dk| at a band-interior point.

    The Bloch number is recovered from the discriminant, k = arccos(tr/2)/q,
    and the band through z is the eigenbranch of E_q(k) closest to z.
    """
    _check_q(seq, q)
    z = complex(z)
    phi = monodromy(seq, q, z)
    tr = complex(np.trace(phi))
    if abs(tr.imag) > 1e-8:
        raise NumericalInstabilityError(
            f"monodromy trace has imaginary part {tr.imag:.2e}"
        )
    if not -2.0 < tr.real < 2.0:
        raise ValueError(
            f"z is at or beyond a band edge (trace {tr.real:.6f} outside (-2, 2))"
        )
    k = math.acos(tr.real / 2.0) / q
    pairs = band_eigens(seq, q, k)
    best = min(pairs, key=lambda p: abs(p.z - z))
    if abs(best.z - z) > 1e-6:
        raise NumericalInstabilityError(
            f"no twisted-restriction eigenvalue matches z (nearest at "
            f"distance {abs(best.z - z):.2e})"
        )
    dz = band_derivative(best, seq, q)
    lhs = float(np.linalg.norm(phi, 2))
    rhs = 4.0 * q / abs(dz)
    return {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs * (1.0 + 1e-8), "k": k}
