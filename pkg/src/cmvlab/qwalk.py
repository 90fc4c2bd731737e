"""Coined quantum walks on the line and their CMV representation.

The one-step operator is U = S Q: first the coin Q = diag(Q_n) acts on each
site's spin pair, then the biased shift S moves spin-up amplitudes one site
right and spin-down amplitudes one site left.  Under the basis ordering

    site n, spin +  ->  flat index 2n + 1
    site n, spin -  ->  flat index 2n + 2

U is pentadiagonal with the CMV block structure exactly when every coin has
the gauge form [[rho, -g], [conj(g), rho]] with g in the open disk and
rho = sqrt(1 - |g|^2); the extracted Verblunsky coefficients then sit at odd
flat indices (even ones vanish).  Coins outside this gauge are reported with
the offending site instead of being silently renormalized.

Dynamics use a window that is pre-grown by the number of steps, so the
absorbing boundary never loses amplitude; the wrap policy keeps the window
fixed and cyclic for spectral checks.  States are immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .coefficients import CoefficientSequence
from .errors import CoinGaugeError, NumericalInstabilityError
from .operator import assemble_cmv

__all__ = [
    "CoinSequence",
    "WalkState",
    "WalkOperator",
    "CMVRepresentation",
    "build_walk",
    "to_cmv",
    "evolve",
    "survival_probability",
    "constant_coins",
    "identity_coins",
    "hadamard_coins",
    "cgmv_coins",
]

_UNITARY_TOL = 1e-13


@dataclass(frozen=True)
class CoinSequence:
    """A map n -> 2x2 unitary coin; period metadata optional."""

    fn: Callable[[int], np.ndarray]
    period: Optional[int] = None

    def __call__(self, n: int) -> np.ndarray:
        q = np.asarray(self.fn(n), dtype=complex)
        if q.shape != (2, 2):
            raise ValueError(f"coin at site {n} must be 2x2, got {q.shape}")
        return q

    def check_unitary(self, n: int) -> np.ndarray:
        q = self(n)
        res = np.max(np.abs(q @ q.conj().T - np.eye(2)))
        if res > _UNITARY_TOL:
            raise ValueError(f"coin at site {n} is not unitary (residual {res:.2e})")
        return q


def constant_coins(q: np.ndarray) -> CoinSequence:
    q = np.asarray(q, dtype=complex)
    return CoinSequence(fn=lambda n: q, period=1)


def identity_coins() -> CoinSequence:
    return constant_coins(np.eye(2))


def hadamard_coins() -> CoinSequence:
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    return constant_coins(h)


def cgmv_coins(gamma: Callable[[int], complex],
               period: Optional[int] = None) -> CoinSequence:
    """Coins [[rho, -g], [conj(g), rho]] from a disk-valued map n -> g_n."""

    def fn(n: int) -> np.ndarray:
        g = complex(gamma(n))
        if abs(g) >= 1.0:
            raise ValueError(f"|gamma({n})| must be < 1, got {abs(g)}")
        rho = math.sqrt(1.0 - abs(g) ** 2)
        return np.array([[rho, -g], [g.conjugate(), rho]], dtype=complex)

    return CoinSequence(fn=fn, period=period)


@dataclass(frozen=True)
class WalkState:
    """Amplitudes (psi_n^+, psi_n^-) on the window [n_lo, n_lo + len)."""

    n_lo: int
    amplitudes: np.ndarray  # (W, 2) complex

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.ndim != 2 or amp.shape[1] != 2 or amp.shape[0] < 1:
            raise ValueError(f"amplitudes must have shape (W, 2), got {amp.shape}")
        nrm = float(np.sum(np.abs(amp) ** 2))
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"state norm^2 must be 1 to 1e-10, got {nrm}")
        amp = amp.copy()
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n_hi(self) -> int:
        return self.n_lo + self.amplitudes.shape[0] - 1

    @classmethod
    def delta(cls, site: int, spin: str, pad: int = 2) -> "WalkState":
        if spin not in ("+", "-"):
            raise ValueError("spin must be '+' or '-'")
        W = 2 * pad + 1
        amp = np.zeros((W, 2), dtype=complex)
        amp[pad, 0 if spin == "+" else 1] = 1.0
        return cls(n_lo=site - pad, amplitudes=amp)

    def amplitude(self, site: int, spin: str) -> complex:
        if not self.n_lo <= site <= self.n_hi:
            return 0j
        return complex(self.amplitudes[site - self.n_lo, 0 if spin == "+" else 1])

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def padded(self, extra: int) -> "WalkState":
        W = self.amplitudes.shape[0]
        amp = np.zeros((W + 2 * extra, 2), dtype=complex)
        amp[extra : extra + W] = self.amplitudes
        return WalkState(n_lo=self.n_lo - extra, amplitudes=amp)


@dataclass(frozen=True)
class WalkOperator:
    """U = S Q on a windowed space with a declared boundary policy."""

    coins: CoinSequence
    n_lo: int
    n_hi: int
    policy: str  # "wrap" | "absorb"

    def __post_init__(self):
        if self.policy not in ("wrap", "absorb"):
            raise ValueError("policy must be 'wrap' or 'absorb'")
        if self.n_hi < self.n_lo:
            raise ValueError("window must be nonempty")
        for n in range(self.n_lo, self.n_hi + 1):
            self.coins.check_unitary(n)

    @property
    def width(self) -> int:
        return self.n_hi - self.n_lo + 1

    def matrix(self) -> np.ndarray:
        """Dense 2W x 2W matrix, site-major ordering (n,+), (n,-)."""
        W = self.width
        U = np.zeros((2 * W, 2 * W), dtype=complex)
        for j in range(W):
            q = self.coins(self.n_lo + j)
            for spin_in in (0, 1):
                col = 2 * j + spin_in
                up, down = q[0, spin_in], q[1, spin_in]
                jp, jm = j + 1, j - 1
                if self.policy == "wrap":
                    jp %= W
                    jm %= W
                if 0 <= jp < W:
                    U[2 * jp + 0, col] += up
                if 0 <= jm < W:
                    U[2 * jm + 1, col] += down
        return U

    def step(self, state: WalkState, coin_table: Optional[np.ndarray] = None
             ) -> WalkState:
        if state.n_lo != self.n_lo or state.n_hi != self.n_hi:
            raise ValueError("state window must match the operator window")
        psi = state.amplitudes
        if coin_table is None:
            coin_table = self.coin_table()
        mixed = np.einsum("jab,jb->ja", coin_table, psi)
        out = np.empty_like(mixed)
        if self.policy == "wrap":
            out[:, 0] = np.roll(mixed[:, 0], 1)
            out[:, 1] = np.roll(mixed[:, 1], -1)
        else:
            out[:, 0] = 0
            out[:, 1] = 0
            out[1:, 0] = mixed[:-1, 0]
            out[:-1, 1] = mixed[1:, 1]
            lost = abs(mixed[-1, 0]) ** 2 + abs(mixed[0, 1]) ** 2
            if lost > 1e-18:
                raise NumericalInstabilityError(
                    f"amplitude {lost:.2e} hit the absorbing boundary; "
                    "enlarge the window"
                )
        return WalkState(n_lo=state.n_lo, amplitudes=out)

    def coin_table(self) -> np.ndarray:
        return np.stack(
            [self.coins(n) for n in range(self.n_lo, self.n_hi + 1)], axis=0
        )


def build_walk(
    coins: CoinSequence,
    window: tuple[int, int],
    policy: str = "wrap",
) -> WalkOperator:
    """Walk operator on the window with the given boundary policy."""
    n_lo, n_hi = window
    return WalkOperator(coins=coins, n_lo=int(n_lo), n_hi=int(n_hi), policy=policy)


def evolve(state: WalkState, walk: WalkOperator, t: int) -> WalkState:
    """State after t applications of the walk.

    With the absorbing policy the window is pre-grown by t sites on both
    sides (support speed is one site per step), so no amplitude is ever
    absorbed and the norm is conserved to rounding.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return state
    if walk.policy == "absorb":
        grown = state.padded(t + 1)
        op = WalkOperator(
            coins=walk.coins, n_lo=grown.n_lo, n_hi=grown.n_hi, policy="absorb"
        )
    else:
        grown = state
        op = walk
    table = op.coin_table()
    for _ in range(t):
        grown = op.step(grown, coin_table=table)
    drift = abs(grown.norm2() - 1.0)
    if drift > 1e-9 * max(t, 1):
        raise NumericalInstabilityError(
            f"norm drifted by {drift:.2e} after {t} steps"
        )
    return grown


def survival_probability(
    state0: WalkState, walk: WalkOperator, J: int, t: int
) -> float:
    """Probability of finding the walker in sites |j| <= J at time t."""
    if J < 0:
        raise ValueError(f"J must be >= 0, got {J}")
    final = evolve(state0, walk, t)
    total = 0.0
    for j in range(-J, J + 1):
        total += abs(final.amplitude(j, "+")) ** 2
        total += abs(final.amplitude(j, "-")) ** 2
    return total


# ---------------------------------------------------------------------------
# CGMV correspondence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CMVRepresentation:
    """The walk operator rewritten as a CMV matrix.

    ``seq`` is the extracted coefficient sequence in global flat indexing;
    ``matrix`` is U on the window in the CMV basis order; ``residual`` is the
    entrywise deviation from the CMV window assembled out of ``seq``.
    """

    seq: CoefficientSequence
    matrix: np.ndarray
    window: tuple[int, int]
    residual: float

    @staticmethod
    def flat_index(site: int, spin: str) -> int:
        if spin == "+":
            return 2 * site + 1
        if spin == "-":
            return 2 * site + 2
        raise ValueError("spin must be '+' or '-'")


def _gauge_gamma(q: np.ndarray, site: int, tol: float = 1e-12) -> complex:
    a, b, c, d = q[0, 0], q[0, 1], q[1, 0], q[1, 1]
    if abs(a.imag) > tol or a.real <= 0:
        raise CoinGaugeError(site, "upper-left entry must be real and positive")
    if abs(a - d) > tol:
        raise CoinGaugeError(site, "diagonal entries must coincide")
    if abs(b + c.conjugate()) > tol:
        raise CoinGaugeError(site, "off-diagonal entries must satisfy b = -conj(c)")
    return c.conjugate()


def to_cmv(
    coins: CoinSequence, window: tuple[int, int] = (0, 15)
) -> CMVRepresentation:
    """Extract the CMV coefficients of a gauge-conforming coin sequence.

    Verifies the correspondence on the window: the walk matrix in the CMV
    basis order must match, entry by entry, the wrapped CMV window built from
    the extracted coefficients.
    """
    n_lo, n_hi = int(window[0]), int(window[1])
    if n_hi <= n_lo:
        raise ValueError("window must contain at least two sites")
    gammas = {}
    for n in range(n_lo, n_hi + 1):
        q = coins.check_unitary(n)
        gammas[n] = _gauge_gamma(q, n)

    def alpha_hat(m: int) -> complex:
        if m % 2 == 0:
            return 0j
        site = (m - 1) // 2
        if site in gammas:
            return gammas[site]
        return _gauge_gamma(coins.check_unitary(site), site)

    bound = max(abs(g) for g in gammas.values()) if gammas else 0.0
    period = 2 * coins.period if coins.period is not None else None
    seq = CoefficientSequence(
        fn=alpha_hat,
        sup_norm_bound=min(bound, 1.0 - 1e-15),
        period=period,
        spec=None,
    )

    walk = build_walk(coins, (n_lo, n_hi), policy="wrap")
    U = walk.matrix()
    shift = 2 * n_lo + 1
    local = CoefficientSequence(
        fn=lambda m: alpha_hat(m + shift),
        sup_norm_bound=seq.sup_norm_bound,
        period=None,
        spec=None,
    )
    ref = assemble_cmv(local, 0, 2 * walk.width, "periodic_wrap").entries
    residual = float(np.max(np.abs(U.T - ref)))
    return CMVRepresentation(
        seq=seq, matrix=U, window=(n_lo, n_hi), residual=residual
    )
