"""The percolation channel ``rho -> sum_K pi_K(p) U_K rho U_K^dagger``.

Three routes are provided:

* :func:`apply_channel_bruteforce` sums over every edge configuration with
  dense unitaries. Exponential in the number of edges; used as the oracle.
* :func:`apply_channel_local` averages over edge states analytically. Each
  input slot of the step operator is governed by exactly one edge, so an
  element ``sigma[j, k]`` of the coin-rotated state only depends on the edges
  of slots ``j`` and ``k``: when they coincide the branches are correlated
  (present/present or absent/absent), otherwise they are independent. Cost
  per step is ``O((dN)^2)`` after the coin rotation.
* :func:`monte_carlo_evolve` samples configuration sequences.

Operators are vectorised row-major: ``vec(X)[r*n + c] = X[r, c]``, so the
conjugation ``X -> A X B`` becomes ``kron(A, B.T)``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .graph import (
    ABSENT,
    PercolationGraph,
    check_enumerable,
    config_probability,
    iter_configs,
)
from .walk import (
    CoinOperator,
    ReflectionOperator,
    WalkError,
    check_density_matrix,
    check_reflection_compatible,
    default_reflection,
    slot_tables,
    walk_unitary_for,
)

log = logging.getLogger(__name__)

SUPEROP_DIM_LIMIT = 128
MC_BLOCK = 256


class ChannelError(ValueError):
    pass


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"p must lie in [0, 1], got {p}")


def apply_coin(rho: np.ndarray, C: np.ndarray) -> np.ndarray:
    """``(I (x) C) rho (I (x) C)^dagger`` using the block structure.

    Leading axes of ``rho`` are treated as a batch.
    """
    d = C.shape[0]
    n = rho.shape[-1]
    N = n // d
    r = rho.reshape(rho.shape[:-2] + (N, d, N, d))
    r = np.einsum("ij,...ajbk,lk->...aibl", C, r, C.conj(), optimize=True)
    return r.reshape(rho.shape)


def apply_channel_bruteforce(g: PercolationGraph, C: CoinOperator, R: Optional[ReflectionOperator],
                             p: float, rho: np.ndarray) -> np.ndarray:
    """Exact convex combination over all ``2^|E|`` unitaries."""
    _check_p(p)
    check_enumerable(g)
    R = R or default_reflection(g)
    out = np.zeros_like(rho, dtype=complex)
    for k in iter_configs(g):
        w = config_probability(g, k, p)
        if w == 0.0:
            continue
        U = walk_unitary_for(g, C, k, R).dense()
        out += w * (U @ rho @ U.conj().T)
    return out


@dataclass
class LocalChannel:
    """Precomputed tables for the local marginalisation at fixed ``p``."""

    graph: PercolationGraph
    coin: CoinOperator
    reflection: ReflectionOperator
    p: float
    _P: sp.csr_matrix = field(init=False, repr=False)
    _A: sp.csr_matrix = field(init=False, repr=False)
    _w: np.ndarray = field(init=False, repr=False)
    _same: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        _check_p(self.p)
        g = self.graph
        if self.coin.d != g.d:
            raise WalkError("coin dimension differs from graph regularity")
        t = slot_tables(g, self.reflection)
        check_reflection_compatible(t)
        n = g.dim
        real = t.edge != ABSENT
        self._w = np.where(real, self.p, 0.0)
        cols = np.arange(n)
        self._P = sp.csr_matrix((np.ones(real.sum()), (t.present[real], cols[real])), shape=(n, n))
        self._A = sp.csr_matrix((np.ones(n), (t.absent, cols)), shape=(n, n))
        self._same = (t.edge[:, None] == t.edge[None, :]) & real[:, None]
        self._tables = t

    @property
    def dim(self) -> int:
        return self.graph.dim

    @staticmethod
    def _conj(M1, X, M2):
        """``M1 X M2^T`` for sparse 0/1 matrices."""
        return (M2 @ (M1 @ X).T).T

    def apply_shift(self, sigma: np.ndarray) -> np.ndarray:
        """Average of ``S_K sigma S_K^T`` over configurations."""
        p = self._w
        q = 1.0 - p
        same = self._same
        s_same = np.where(same, sigma, 0.0)
        s_diff = sigma - s_same
        XPP = s_same * p[:, None] + s_diff * np.outer(p, p)
        XAA = s_same * q[:, None] + s_diff * np.outer(q, q)
        XPA = s_diff * np.outer(p, q)
        XAP = s_diff * np.outer(q, p)
        P, A = self._P, self._A
        return (self._conj(P, XPP, P) + self._conj(A, XAA, A)
                + self._conj(P, XPA, A) + self._conj(A, XAP, P))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return self.apply_shift(apply_coin(rho, self.coin.matrix))

    def shift_superoperator(self) -> sp.csr_matrix:
        """Sparse matrix of :meth:`apply_shift` on row-major vectors."""
        n = self.dim
        t = self._tables
        p = self._w
        q = 1.0 - p
        j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        j, k = j.ravel(), k.ravel()
        col = j * n + k
        same = self._same[j, k]
        pres = t.present
        rows, cols, vals = [], [], []

        def add(oj, ok, w, mask):
            mask = mask & (w != 0.0)
            rows.append(oj[mask] * n + ok[mask])
            cols.append(col[mask])
            vals.append(w[mask])

        pj_ok = pres[j] >= 0
        pk_ok = pres[k] >= 0
        Pj = np.where(pj_ok, pres[j], 0)
        Pk = np.where(pk_ok, pres[k], 0)
        Aj, Ak = t.absent[j], t.absent[k]
        add(Pj, Pk, np.where(same, p[j], p[j] * p[k]), pj_ok & pk_ok)
        add(Aj, Ak, np.where(same, q[j], q[j] * q[k]), np.ones_like(same))
        add(Pj, Ak, p[j] * q[k], pj_ok & ~same)
        add(Aj, Pk, q[j] * p[k], pk_ok & ~same)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n * n, n * n),
        )


def apply_channel_local(g: PercolationGraph, C: CoinOperator, R: Optional[ReflectionOperator],
                        p: float, rho: np.ndarray) -> np.ndarray:
    """One channel step by local edge marginalisation; agrees with brute force."""
    return LocalChannel(g, C, R or default_reflection(g), p).apply(rho)


@dataclass
class Superoperator:
    """Explicit sparse channel matrix on row-major vectorised operators."""

    matrix: sp.csr_matrix
    n: int
    graph: PercolationGraph
    coin: CoinOperator
    reflection: ReflectionOperator
    p: float

    @property
    def dim(self) -> int:
        return self.n * self.n

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ rho.ravel()).reshape(self.n, self.n)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def build_superoperator(g: PercolationGraph, C: CoinOperator, R: Optional[ReflectionOperator],
                        p: float) -> Superoperator:
    """Materialise the channel as a sparse ``(dN)^2 x (dN)^2`` matrix."""
    if g.dim > SUPEROP_DIM_LIMIT:
        raise ChannelError(f"dN={g.dim} exceeds superoperator limit {SUPEROP_DIM_LIMIT}")
    R = R or default_reflection(g)
    ch = LocalChannel(g, C, R, p)
    coin = sp.kron(sp.identity(g.N), sp.csr_matrix(C.matrix), format="csr")
    K = sp.kron(coin, coin.conj(), format="csr")
    M = (ch.shift_superoperator() @ K).tocsr()
    M.eliminate_zeros()
    return Superoperator(M, g.dim, g, C, R, p)


# -- evolution ------------------------------------------------------------------------

@dataclass
class Trajectory:
    """States ``rho(t)`` for ``t = 0..step_count``.

    ``states`` may be ``None`` in low-memory mode; ``diagonals`` (joint
    distributions) are always kept.
    """

    diagonals: np.ndarray
    states: Optional[np.ndarray] = None

    @property
    def step_count(self) -> int:
        return len(self.diagonals) - 1

    def __len__(self) -> int:
        return len(self.diagonals)

    def __getitem__(self, t: int) -> np.ndarray:
        if self.states is None:
            raise ChannelError("trajectory was recorded without states")
        return self.states[t]


def _stepper(g, C, R, p, method):
    R = R or default_reflection(g)
    if method == "local":
        return LocalChannel(g, C, R, p).apply
    if method == "bruteforce":
        check_enumerable(g)
        return lambda rho: apply_channel_bruteforce(g, C, R, p, rho)
    if method == "matrix":
        return build_superoperator(g, C, R, p).apply
    raise ChannelError(f"unknown method {method!r}")


def evolve(g: PercolationGraph, C: CoinOperator, R: Optional[ReflectionOperator], p: float,
           rho0: np.ndarray, n_steps: int, method: str = "local", keep_states: bool = True,
           check: bool = False) -> Trajectory:
    """Iterate the channel ``n_steps`` times starting from ``rho0``."""
    step = _stepper(g, C, R, p, method)
    rho = np.asarray(rho0, dtype=complex)
    diags = [np.real(np.diag(rho)).copy()]
    states = [rho] if keep_states else None
    for _ in range(n_steps):
        rho = step(rho)
        if check:
            check_density_matrix(rho)
        diags.append(np.real(np.diag(rho)).copy())
        if keep_states:
            states.append(rho)
    return Trajectory(np.array(diags), np.array(states) if keep_states else None)


def _tree_sum(x: np.ndarray) -> np.ndarray:
    """Pairwise sum over axis 0 in a fixed order."""
    while len(x) > 1:
        if len(x) % 2:
            x = np.concatenate([x[:-2], (x[-2] + x[-1])[None]])
        x = x[0::2] + x[1::2]
    return x[0]


def trajectory_rng(seed: int, i: int) -> np.random.Generator:
    """Generator of trajectory ``i``: child ``i`` of ``SeedSequence(seed)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))


def _mc_block(g, C, tables, p, rho0, n_steps, seed, start, stop):
    b = stop - start
    n = g.dim
    masks = np.stack([trajectory_rng(seed, i).random((n_steps, g.n_edges)) < p
                      for i in range(start, stop)])
    rho = np.broadcast_to(rho0, (b, n, n)).astype(complex)
    sums = [_tree_sum(rho)]
    rows = np.arange(b)[:, None, None]
    real = tables.edge != ABSENT
    edge = np.where(real, tables.edge, 0)
    for t in range(n_steps):
        on = masks[:, t][:, edge] & real
        perm = np.where(on, tables.present, tables.absent)
        sigma = apply_coin(rho, C.matrix)
        new = np.empty_like(sigma)
        new[rows, perm[:, :, None], perm[:, None, :]] = sigma
        rho = new
        sums.append(_tree_sum(rho))
    return np.array(sums)


def monte_carlo_evolve(g: PercolationGraph, C: CoinOperator, R: Optional[ReflectionOperator],
                       p: float, rho0: np.ndarray, n_steps: int, n_traj: int, seed: int = 0,
                       workers: int = 1) -> Trajectory:
    """Average of sampled unitary trajectories.

    Results are bit-identical for a given ``seed`` regardless of ``workers``:
    trajectories are summed in fixed blocks with a pairwise tree.
    """
    if n_traj < 1:
        raise ChannelError("n_traj must be >= 1")
    _check_p(p)
    R = R or default_reflection(g)
    tables = slot_tables(g, R)
    check_reflection_compatible(tables)
    bounds = [(s, min(s + MC_BLOCK, n_traj)) for s in range(0, n_traj, MC_BLOCK)]
    args = [(g, C, tables, p, np.asarray(rho0), n_steps, seed, s, e) for s, e in bounds]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            blocks = list(ex.map(lambda a: _mc_block(*a), args))
    else:
        blocks = [_mc_block(*a) for a in args]
    mean = _tree_sum(np.array(blocks)) / n_traj
    return Trajectory(np.real(np.einsum("tii->ti", mean)).copy(), mean)
