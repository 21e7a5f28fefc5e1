import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import naive_channel, random_density
from percowalk.channel import (
    ChannelError,
    LocalChannel,
    apply_channel_bruteforce,
    apply_channel_local,
    apply_coin,
    build_superoperator,
    evolve,
    monte_carlo_evolve,
)
from percowalk.graph import EdgeConfig, from_adjacency, make_cycle, make_line
from percowalk.walk import (
    coin_family,
    coin_from_matrix,
    hadamard,
    localized_initial_state,
    reverse_direction_reflection,
    sigma_x_reflection,
    walk_unitary_for,
)

K4_Z4 = [[1, 3, 2], [2, 0, 3], [3, 1, 0], [0, 2, 1]]
makers = st.sampled_from([make_cycle, make_line])


@given(makers, st.integers(2, 5), st.floats(0.0, 1.0), st.floats(-3, 3), st.floats(0.05, 1.5),
       st.integers(0, 2**31))
def test_local_matches_naive_oracle(make, N, p, a, b, seed):
    g = make(N)
    C = coin_family(a, b)
    rho = random_density(g.dim, np.random.default_rng(seed))
    ref = naive_channel(g, C.matrix, p, rho)
    assert np.max(np.abs(apply_channel_local(g, C, None, p, rho) - ref)) < 1e-12
    assert np.max(np.abs(apply_channel_bruteforce(g, C, None, p, rho) - ref)) < 1e-12


def test_hand_computed_single_step():
    # Hadamard on the 4-cycle from |0,0><0,0| at p=1/2. The coin gives |+> at
    # vertex 0; slot (0,0) hops to (3,0) or reflects to (0,1); slot (0,1) hops
    # to (1,1) or reflects to (0,0), each via an independent edge.
    g = make_cycle(4)
    rho = np.zeros((8, 8), complex)
    rho[0, 0] = 1.0
    out = apply_channel_local(g, hadamard(), None, 0.5, rho)
    idx = {"00": 0, "01": 1, "11": 3, "30": 6}
    expected = np.zeros((8, 8))
    for k in idx.values():
        expected[k, k] = 0.25
    for j, k in [("30", "11"), ("30", "00"), ("01", "11"), ("01", "00")]:
        expected[idx[j], idx[k]] = expected[idx[k], idx[j]] = 0.125
    assert np.max(np.abs(out - expected)) < 1e-15


def test_extreme_p_reduce_to_single_unitary(rng):
    C = coin_family(0.4, 0.9)
    for g in (make_cycle(5), make_line(4)):
        rho = random_density(g.dim, rng)
        for p, k in ((0.0, EdgeConfig.empty()), (1.0, EdgeConfig.full(g))):
            U = walk_unitary_for(g, C, k).dense()
            assert np.allclose(apply_channel_local(g, C, None, p, rho), U @ rho @ U.conj().T, atol=1e-13)


def test_two_cycle_shared_edge(rng):
    g = make_cycle(2)
    C = coin_family(0.3, 0.5)
    rho = random_density(4, rng)
    ref = 0.6 * _conj(walk_unitary_for(g, C, EdgeConfig.full(g)).dense(), rho) \
        + 0.4 * _conj(walk_unitary_for(g, C, EdgeConfig.empty()).dense(), rho)
    assert np.allclose(apply_channel_local(g, C, None, 0.6, rho), ref, atol=1e-14)


def _conj(U, rho):
    return U @ rho @ U.conj().T


def test_k4_local_matches_bruteforce(rng):
    g = from_adjacency(4, 3, K4_Z4)
    R = reverse_direction_reflection(g)
    C = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    coin = coin_from_matrix(C)
    rho = random_density(12, rng)
    a = apply_channel_local(g, coin, R, 0.35, rho)
    b = apply_channel_bruteforce(g, coin, R, 0.35, rho)
    c = naive_channel(g, C, 0.35, rho, R=R.perm)
    assert np.max(np.abs(a - b)) < 1e-13 and np.max(np.abs(a - c)) < 1e-13


@pytest.mark.parametrize("make,N", [(make_cycle, 2), (make_cycle, 5), (make_line, 4)])
def test_superoperator_matches_local(make, N, rng):
    g = make(N)
    C = coin_family(1.1, 0.3)
    phi = build_superoperator(g, C, None, 0.42)
    rho = random_density(g.dim, rng)
    assert np.allclose(phi.apply(rho), apply_channel_local(g, C, None, 0.42, rho), atol=1e-14)
    assert phi.dim == g.dim**2


def test_superoperator_size_guard():
    with pytest.raises(ChannelError):
        build_superoperator(make_cycle(70), hadamard(), None, 0.5)


def test_apply_coin_batched(rng):
    C = coin_family(0.2, 0.7).matrix
    rhos = np.stack([random_density(6, rng) for _ in range(3)])
    IC = np.kron(np.eye(3), C)
    out = apply_coin(rhos, C)
    for r, o in zip(rhos, out):
        assert np.allclose(o, IC @ r @ IC.conj().T)


@given(makers, st.integers(2, 7), st.floats(0.0, 1.0), st.integers(0, 2**31))
def test_channel_is_cptp_on_random_states(make, N, p, seed):
    rng = np.random.default_rng(seed)
    g = make(N)
    C = coin_family(rng.uniform(-3, 3), rng.uniform(0.05, 1.5))
    rho = random_density(g.dim, rng, rank=int(rng.integers(1, g.dim + 1)))
    out = apply_channel_local(g, C, None, p, rho)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.max(np.abs(out - out.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(out).min() > -1e-10


def test_p_out_of_range():
    with pytest.raises(ChannelError):
        apply_channel_local(make_cycle(3), hadamard(), None, 1.2, np.eye(6) / 6)
    with pytest.raises(ChannelError):
        LocalChannel(make_cycle(3), hadamard(), sigma_x_reflection(), -0.1)


def test_evolve_methods_agree():
    g = make_cycle(5)
    C = coin_family(0.9, 0.6)
    rho0 = localized_initial_state(g, 1, 0.4, 0.2, 0.8)
    trs = [evolve(g, C, None, 0.3, rho0, 12, method=m, check=True)
           for m in ("local", "bruteforce", "matrix")]
    for t in trs[1:]:
        assert np.allclose(t.states, trs[0].states, atol=1e-13)
    t = trs[0]
    assert t.step_count == 12 and len(t) == 13
    assert np.allclose(t.diagonals.sum(axis=1), 1.0)
    lean = evolve(g, C, None, 0.3, rho0, 12, keep_states=False)
    assert np.allclose(lean.diagonals, t.diagonals)
    with pytest.raises(ChannelError):
        lean[3]
    with pytest.raises(ChannelError):
        evolve(g, C, None, 0.3, rho0, 2, method="nope")


def test_monte_carlo_reproducible_and_worker_independent():
    g = make_cycle(5)
    C = hadamard()
    rho0 = localized_initial_state(g, 0, np.pi / 2, 0.0)
    a = monte_carlo_evolve(g, C, None, 0.5, rho0, 6, 600, seed=7, workers=1)
    b = monte_carlo_evolve(g, C, None, 0.5, rho0, 6, 600, seed=7, workers=3)
    c = monte_carlo_evolve(g, C, None, 0.5, rho0, 6, 600, seed=8)
    assert np.array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)


def test_single_trajectory_stays_pure():
    g = make_line(4)
    rho0 = localized_initial_state(g, 1, 1.0, 0.5)
    t = monte_carlo_evolve(g, hadamard(), None, 0.5, rho0, 10, 1, seed=3)
    for rho in t.states:
        assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-12)


def test_monte_carlo_prefix_consistency():
    # trajectory i depends only on (seed, i), so the first block is shared
    g = make_cycle(4)
    rho0 = localized_initial_state(g, 0)
    small = monte_carlo_evolve(g, hadamard(), None, 0.5, rho0, 4, 10, seed=1)
    big = monte_carlo_evolve(g, hadamard(), None, 0.5, rho0, 4, 20, seed=1)
    assert not np.allclose(small.states, big.states)
    with pytest.raises(ChannelError):
        monte_carlo_evolve(g, hadamard(), None, 0.5, rho0, 4, 0)


def test_monte_carlo_converges_to_exact():
    g = make_cycle(4)
    rho0 = localized_initial_state(g, 0, np.pi / 2, -np.pi / 2)
    exact = evolve(g, hadamard(), None, 0.5, rho0, 8)
    mc = monte_carlo_evolve(g, hadamard(), None, 0.5, rho0, 8, 4000, seed=11)
    assert np.abs(mc.diagonals - exact.diagonals).sum(axis=1).max() < 0.06
