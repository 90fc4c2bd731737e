import math

import numpy as np
import pytest

from cmvlab import qwalk as Q
from cmvlab.errors import CoinGaugeError


def test_pure_shift_single_and_many_steps():
    st = Q.WalkState.delta(0, "+")
    walk = Q.build_walk(Q.identity_coins(), (st.n_lo, st.n_hi), policy="absorb")
    out = Q.evolve(st, walk, 5)
    assert out.amplitude(5, "+") == pytest.approx(1.0)
    assert out.norm2() == pytest.approx(1.0, abs=1e-12)


def test_spin_swap_coin_single_step():
    swap = Q.constant_coins(np.array([[0, 1], [1, 0]]))
    st = Q.WalkState.delta(0, "+")
    walk = Q.build_walk(swap, (st.n_lo, st.n_hi), policy="absorb")
    out = Q.evolve(st, walk, 1)
    assert out.amplitude(-1, "-") == pytest.approx(1.0)


def test_evolve_t0_identity():
    st = Q.WalkState.delta(2, "-")
    walk = Q.build_walk(Q.hadamard_coins(), (st.n_lo, st.n_hi), policy="absorb")
    assert Q.evolve(st, walk, 0) is st


def test_hadamard_unitarity_and_norm():
    st = Q.WalkState.delta(0, "+")
    walk = Q.build_walk(Q.hadamard_coins(), (-8, 7), policy="wrap")
    U = walk.matrix()
    assert np.max(np.abs(U @ U.conj().T - np.eye(32))) < 1e-13
    out = Q.evolve(st, Q.build_walk(Q.hadamard_coins(), (st.n_lo, st.n_hi),
                                    policy="absorb"), 100)
    assert abs(out.norm2() - 1.0) < 1e-7


def test_build_walk_rejects_non_unitary():
    bad = Q.constant_coins(np.array([[1.0, 0.0], [0.0, 0.5]]))
    with pytest.raises(ValueError, match="not unitary"):
        Q.build_walk(bad, (0, 3))


def test_survival_examples():
    st = Q.WalkState.delta(0, "+")
    shift = Q.build_walk(Q.identity_coins(), (st.n_lo, st.n_hi), policy="absorb")
    assert Q.survival_probability(st, shift, 0, 0) == pytest.approx(1.0)
    assert Q.survival_probability(st, shift, 3, 10) == pytest.approx(0.0, abs=1e-15)

    had = Q.build_walk(Q.hadamard_coins(), (st.n_lo, st.n_hi), policy="absorb")
    s20 = Q.survival_probability(st, had, 5, 20)
    s200 = Q.survival_probability(st, had, 5, 200)
    assert s200 < s20


def test_wrap_requires_matching_window():
    st = Q.WalkState.delta(0, "+")
    walk = Q.build_walk(Q.hadamard_coins(), (-10, 10), policy="wrap")
    with pytest.raises(ValueError):
        walk.step(st)


def test_walk_state_validations():
    with pytest.raises(ValueError):
        Q.WalkState(n_lo=0, amplitudes=np.ones((3, 2)))
    with pytest.raises(ValueError):
        Q.WalkState.delta(0, "x")


def test_to_cmv_identity_coins_is_free():
    rep = Q.to_cmv(Q.identity_coins(), window=(0, 7))
    assert rep.residual < 1e-12
    assert all(rep.seq(m) == 0 for m in range(-8, 9))


def test_to_cmv_bandwidth():
    rep = Q.to_cmv(Q.identity_coins(), window=(-4, 3))
    n = rep.matrix.shape[0]
    i, j = np.indices((n, n))
    dist = np.minimum(np.abs(i - j), n - np.abs(i - j))
    assert np.max(np.abs(rep.matrix[dist > 2])) == 0.0


def test_to_cmv_round_trip_random(rng):
    for _ in range(50):
        p = int(rng.integers(1, 5))
        gs = 0.7 * rng.random(p) * np.exp(2j * math.pi * rng.random(p))
        coins = Q.cgmv_coins(lambda n, gs=gs, p=p: gs[n % p], period=p)
        rep = Q.to_cmv(coins, window=(-4, 5))
        assert rep.residual < 1e-12
        assert rep.seq.period == 2 * p
        for n in range(-3, 4):
            assert rep.seq(2 * n + 1) == pytest.approx(gs[n % p], abs=1e-14)
            assert rep.seq(2 * n) == 0


def test_to_cmv_any_window_parity(rng):
    gs = 0.6 * rng.random(3) * np.exp(2j * math.pi * rng.random(3))
    coins = Q.cgmv_coins(lambda n: gs[n % 3], period=3)
    for win in [(-7, 4), (0, 2), (-3, -1), (5, 20)]:
        assert Q.to_cmv(coins, window=win).residual < 1e-13


def test_to_cmv_reports_offending_site():
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)

    def fn(n):
        return h if n == 3 else np.eye(2)

    with pytest.raises(CoinGaugeError) as err:
        Q.to_cmv(Q.CoinSequence(fn=fn), window=(0, 7))
    assert err.value.site == 3


def test_ordering_map():
    rep = Q.to_cmv(Q.identity_coins(), window=(0, 3))
    assert rep.flat_index(0, "+") == 1
    assert rep.flat_index(0, "-") == 2
    assert rep.flat_index(2, "+") == 5
    with pytest.raises(ValueError):
        rep.flat_index(0, "z")


def test_scattering_surrogate_decreasing():
    st = Q.WalkState.delta(0, "+")
    walk = Q.build_walk(Q.hadamard_coins(), (st.n_lo, st.n_hi), policy="absorb")
    surv = [Q.survival_probability(st, walk, 5, t) for t in (128, 256, 512)]
    assert surv[0] > surv[1] > surv[2]
    assert surv[2] < 0.2


def test_absorbing_step_guards_edge_amplitude():
    from cmvlab.errors import NumericalInstabilityError

    st = Q.WalkState.delta(0, "+", pad=1)
    walk = Q.build_walk(Q.identity_coins(), (st.n_lo, st.n_hi), policy="absorb")
    mid = walk.step(st)  # walker now at the right edge
    with pytest.raises(NumericalInstabilityError, match="enlarge"):
        walk.step(mid)
