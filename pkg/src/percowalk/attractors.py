"""Attractor space of the percolation channel and the asymptotic dynamics it fixes.

The attractor space is spanned by operators ``X`` with ``U_K X U_K^dagger =
lambda X`` for every configuration ``K`` and ``|lambda| = 1``. Three
independent routes compute it:

* :func:`solve_attractors_spectral` -- unit-modulus eigenspaces of the
  materialised channel matrix.
* :func:`solve_attractors_twostep` -- first the shift-consistency subspace
  ``S_K^dagger X S_K = S_0^dagger X S_0``, then the all-edges-missing
  eigenproblem ``(RC) X^{(s,t)} (RC)^dagger = lambda X^{(s,t)}`` on it. It never
  touches ``p``.
* :func:`catalog_1d` -- closed-form bases for lines and cycles.

All bases are Hilbert-Schmidt orthonormal, so asymptotic coefficients are
plain overlaps ``Tr(X^dagger rho0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .channel import LocalChannel, Superoperator
from .graph import (
    EdgeConfig,
    PercolationGraph,
    make_cycle,
    make_line,
)
from .walk import (
    AlphaRational,
    Angle,
    CoinOperator,
    ReflectionOperator,
    check_reflection_compatible,
    coin_family,
    default_reflection,
    slot_tables,
    step_permutation,
    to_radians,
)

UNIT_TOL = 1e-8
CLUSTER_TOL = 1e-6
NULL_TOL = 1e-9
RESIDUAL_TOL = 1e-10
SPECTRAL_DIM_LIMIT = 64
P_MARGIN = 1e-6


class AttractorError(ValueError):
    pass


class JordanBlockError(AttractorError):
    pass


class CatalogError(AttractorError):
    pass


@dataclass
class AttractorBasis:
    """Orthonormal eigen-operators ``(lambda_i, X_i)`` with ``|lambda_i| = 1``.

    ``phases[i]`` is ``arg(lambda_i) / 2pi`` as an exact ``Fraction`` when it
    can be established from rational coin angles, else ``None``.
    """

    eigenvalues: np.ndarray
    matrices: list
    phases: list = field(default_factory=list)
    case: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.phases:
            self.phases = [None] * len(self.matrices)

    @property
    def dimension(self) -> int:
        return len(self.matrices)

    @property
    def items(self):
        return list(zip(self.eigenvalues, self.matrices))

    def __len__(self) -> int:
        return self.dimension

    def distinct_eigenvalues(self, tol: float = CLUSTER_TOL) -> list:
        return [lam for lam, _ in _clusters(np.asarray(self.eigenvalues), tol)]

    def subspace(self, lam: complex, tol: float = CLUSTER_TOL) -> np.ndarray:
        """Columns are the vectorised basis matrices belonging to ``lam``."""
        cols = [X.ravel() for l, X in self.items if abs(l - lam) < tol]
        n = self.matrices[0].size if self.matrices else 0
        return np.array(cols).T if cols else np.zeros((n, 0), dtype=complex)

    def coefficients(self, rho0: np.ndarray) -> np.ndarray:
        """Overlaps ``Tr(X_i^dagger rho0)``."""
        return np.array([np.vdot(X, rho0) for X in self.matrices])

    def gram(self) -> np.ndarray:
        V = np.array([X.ravel() for X in self.matrices])
        return V.conj() @ V.T


# -- linear algebra helpers --------------------------------------------------------

def _clusters(values: np.ndarray, tol: float):
    """Group nearby complex numbers; returns ``(unit-normalised mean, indices)``."""
    order = np.lexsort((values.imag, np.round(np.mod(np.angle(values), 2 * np.pi), 9)))
    groups = []
    for i in order:
        for g in groups:
            if abs(values[i] - values[g[0]]) < tol:
                g.append(i)
                break
        else:
            groups.append([i])
    out = []
    for g in groups:
        lam = values[g].mean()
        out.append((lam / abs(lam), g))
    out.sort(key=lambda t: (round(float(np.mod(np.angle(t[0]), 2 * np.pi)), 9)))
    return out


def null_space(A: np.ndarray, dim: Optional[int] = None, tol: float = NULL_TOL) -> np.ndarray:
    """Orthonormal null-space basis from the SVD.

    With ``dim`` given exactly that many right singular vectors are returned
    and their singular values must be below ``tol * max(1, ||A||)``.
    """
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    n = A.shape[1]
    s_full = np.zeros(n)
    s_full[: len(s)] = s
    scale = max(1.0, s[0] if len(s) else 0.0)
    if dim is None:
        dim = int(np.sum(s_full < tol * scale))
    elif dim and s_full[n - dim] > tol * scale:
        raise JordanBlockError(
            f"geometric multiplicity below {dim}: singular value {s_full[n - dim]:.3e}"
        )
    return vh[n - dim:].conj().T if dim else np.zeros((n, 0), dtype=complex)


def canonical_basis(Q: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of ``span(Q)``.

    Matrix units are projected onto the subspace and picked greedily by
    largest residual norm (ties to the lowest index); the picks are then
    orthonormalised. The result depends only on the subspace.
    """
    m = Q.shape[1]
    if m == 0:
        return Q
    Y = Q.conj().T.copy()  # column i = coordinates of projected matrix unit i
    picks = []
    R = Y.copy()
    for _ in range(m):
        norms = np.round(np.linalg.norm(R, axis=0), 9)
        i = int(np.argmax(norms))
        picks.append(i)
        v = R[:, i] / np.linalg.norm(R[:, i])
        R = R - np.outer(v, v.conj() @ R)
    Qy, Ry = np.linalg.qr(Y[:, picks])
    signs = np.diag(Ry) / np.abs(np.diag(Ry))
    return Q @ (Qy * signs)


def subspace_angles(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Principal angles between column spans; ``inf`` when dimensions differ."""
    if A.shape[1] != B.shape[1]:
        return np.array([np.inf])
    if A.shape[1] == 0:
        return np.zeros(0)
    return sla.subspace_angles(A, B)


def max_basis_angle(a: AttractorBasis, b: AttractorBasis) -> float:
    """Largest principal angle over all eigenvalues of either basis."""
    lams = a.distinct_eigenvalues() + b.distinct_eigenvalues()
    worst = 0.0
    for lam in lams:
        ang = subspace_angles(a.subspace(lam), b.subspace(lam))
        if ang.size:
            worst = max(worst, float(np.max(ang)))
    return worst


def modified_gram_schmidt(mats: Sequence[np.ndarray], tol: float = 1e-10) -> list:
    """HS-orthonormalise in the given order, dropping dependent members."""
    out = []
    for M in mats:
        V = np.array(M, dtype=complex)
        for Q in out:
            V = V - np.vdot(Q, V) * Q
        nrm = np.linalg.norm(V)
        if nrm > tol:
            out.append(V / nrm)
    return out


# -- exact phases --------------------------------------------------------------------

def _candidate_phases(coin: Optional[CoinOperator]) -> list:
    """Exact phase fractions (units of 2pi) for the coin family's attractor spectrum."""
    cands = [Fraction(0)]
    if coin is not None and isinstance(coin.beta, AlphaRational):
        f = coin.beta.fraction  # lambda = exp(+-2 i beta) -> phase +-beta/pi turns
        cands += [f % 1, (-f) % 1]
    return cands


def exact_phase(lam: complex, coin: Optional[CoinOperator], tol: float = 1e-8) -> Optional[Fraction]:
    turn = float(np.mod(np.angle(lam), 2 * np.pi) / (2 * np.pi))
    for f in _candidate_phases(coin):
        if min(abs(turn - float(f)), 1 - abs(turn - float(f))) < tol:
            return f
    return None


def _assemble(pairs, coin, case=None, meta=None) -> AttractorBasis:
    """Canonicalise each eigenspace and pack into a basis sorted by phase."""
    lams, mats, phases = [], [], []
    for lam, Q, n in pairs:
        Q = canonical_basis(Q)
        for j in range(Q.shape[1]):
            lams.append(lam)
            mats.append(Q[:, j].reshape(n, n))
            phases.append(exact_phase(lam, coin))
    return AttractorBasis(np.array(lams, dtype=complex), mats, phases, case, meta or {})


# -- case table ---------------------------------------------------------------------------

def cycle_case(N: int, alpha: AlphaRational) -> str:
    """Case tag of the cycle dispatch for ``alpha = l pi / m``."""
    l, m = alpha.numerator, alpha.denominator
    if N == 2 and m != 1:
        return "cycle-N2"
    if N % 2 == 1 and N % m == 0:
        return "cycle-odd-special"
    if N % 2 == 0 and (N * l) % (2 * m) == 0:
        return "cycle-even-special"
    return "cycle-generic"


CASE_DIMENSION = {
    "line": 5,
    "cycle-even-special": 5,
    "cycle-odd-special": 2,
    "cycle-N2": 2,
    "cycle-generic": 1,
}


def graph_case(g: PercolationGraph, coin: CoinOperator) -> Optional[str]:
    if g.kind == "line" and coin.from_family:
        return "line"
    if g.kind == "cycle" and isinstance(coin.alpha, AlphaRational):
        return cycle_case(g.N, coin.alpha)
    return None


# -- spectral route ---------------------------------------------------------------------

def _check_solver_p(p: float) -> None:
    if not P_MARGIN < p < 1.0 - P_MARGIN:
        raise AttractorError(f"attractor solvers need 0 < p < 1 strictly, got p={p}")


def unit_circle_eigenspaces(M: np.ndarray, tol: float = UNIT_TOL):
    """``[(lambda, Q)]`` for the unit-modulus spectrum of a dense matrix.

    The null space of ``M - lambda`` must have the full algebraic multiplicity
    (one-dimensional Jordan blocks), otherwise :class:`JordanBlockError`.
    """
    ev = np.linalg.eigvals(M)
    on = np.flatnonzero(np.abs(np.abs(ev) - 1.0) < tol)
    eye = np.eye(M.shape[0])
    out = []
    for lam, idx in _clusters(ev[on], CLUSTER_TOL):
        Q = null_space(M - lam * eye, dim=len(idx), tol=1e-7)
        out.append((lam, Q))
    return out


def solve_attractors_spectral(phi: Superoperator) -> AttractorBasis:
    """Attractor basis from the unit-modulus eigenspaces of the channel matrix."""
    _check_solver_p(phi.p)
    if phi.n > SPECTRAL_DIM_LIMIT:
        raise AttractorError(f"dN={phi.n} exceeds dense eigensolver limit {SPECTRAL_DIM_LIMIT}")
    pairs = [(lam, Q, phi.n) for lam, Q in unit_circle_eigenspaces(phi.dense())]
    return _assemble(pairs, phi.coin, graph_case(phi.graph, phi.coin),
                     {"method": "spectral", "p": phi.p})


def jordan_defect(M: np.ndarray, lam: complex, multiplicity: int, tol: float = 1e-7) -> int:
    """``(dim - rank(M - lam)) - multiplicity``; zero for trivial Jordan blocks."""
    s = np.linalg.svd(M - lam * np.eye(M.shape[0]), compute_uv=False)
    geo = int(np.sum(s < tol * max(1.0, s[0])))
    return multiplicity - geo


# -- two-step route ------------------------------------------------------------------------

def _union_find_orbits(n: int, perms: Sequence[np.ndarray]) -> np.ndarray:
    """Orbit label of each pair ``(i, j)`` under ``(i, j) -> (pi(i), pi(j))``."""
    parent = np.arange(n * n)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    pairs = np.arange(n * n)
    i, j = pairs // n, pairs % n
    for pi in perms:
        image = pi[i] * n + pi[j]
        for a, b in zip(pairs, image):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return np.array([find(x) for x in pairs])


def shift_consistent_subspace(g: PercolationGraph, R: ReflectionOperator,
                              configs: Optional[Sequence[EdgeConfig]] = None) -> sp.csr_matrix:
    """Orthonormal basis (sparse columns) of ``{X : S_K^† X S_K = S_0^† X S_0  for all K}``.

    With ``configs=None`` the full configuration and every single-edge
    configuration are used; pairwise conditions against the empty
    configuration generate all others.
    """
    t = slot_tables(g, R)
    check_reflection_compatible(t)
    E = g.n_edges
    if configs is None:
        configs = [EdgeConfig.full(g)] + [EdgeConfig(1 << e) for e in range(E)]
    s0 = step_permutation(t, np.zeros(E, bool))
    inv0 = np.argsort(s0)
    n = g.dim
    # Y = S_0^T X S_0 must be invariant under Q_K = S_0^{-1} S_K acting on both indices
    perms = [inv0[step_permutation(t, k.as_bool(g))] for k in configs]
    labels = _union_find_orbits(n, perms)
    _, orbit, counts = np.unique(labels, return_inverse=True, return_counts=True)
    vals = 1.0 / np.sqrt(counts[orbit])
    # basis of Y-space, then X = S_0 Y S_0^T, i.e. X[s0(i), s0(j)] = Y[i, j]
    pairs = np.arange(n * n)
    xi = s0[pairs // n] * n + s0[pairs % n]
    return sp.csr_matrix((vals, (xi, orbit)), shape=(n * n, len(counts)), dtype=complex)


def solve_attractors_twostep(g: PercolationGraph, C: CoinOperator,
                             R: Optional[ReflectionOperator] = None,
                             configs: Optional[Sequence[EdgeConfig]] = None) -> AttractorBasis:
    """Attractors from shift consistency plus the all-edges-missing coin eigenproblem."""
    R = R or default_reflection(g)
    B = shift_consistent_subspace(g, R, configs)
    RC = R.matrix @ C.matrix
    block = sp.kron(sp.identity(g.N), sp.csr_matrix(RC), format="csr")
    M = sp.kron(block, block.conj(), format="csr")
    MB = (M @ B).toarray()
    Bd = B.toarray()
    cand = np.linalg.eigvals(np.kron(RC, RC.conj()))
    pairs = []
    for lam, _ in _clusters(cand, CLUSTER_TOL):
        Y = null_space(MB - lam * Bd)
        if Y.shape[1]:
            pairs.append((lam, Bd @ Y, g.dim))
    return _assemble(pairs, C, graph_case(g, C), {"method": "twostep"})




# -- closed-form catalogue ---------------------------------------------------------------------

def _catalog_matrices(N: int, alpha: float):
    """Closed-form candidates ``Z1, Z2, Z3, X, Y`` with ``delta = s - t - c + d``."""
    s, c, t, d = np.meshgrid(np.arange(N), np.arange(2), np.arange(N), np.arange(2), indexing="ij")
    delta = s - t - c + d
    even = (delta % 2 == 0).astype(float)
    odd = 1.0 - even
    n = 2 * N
    shape = (n, n)
    Z1 = np.eye(n, dtype=complex) / math.sqrt(n)
    Z2 = (np.exp(1j * alpha * (delta - 1)) * odd * 2 / (2 * math.sqrt(2) * N)).reshape(shape)
    # Z3 with the same entry magnitude as Z2, giving unit HS norm
    Z3 = (np.exp(1j * alpha * delta) * even * 2 / (2 * math.sqrt(2) * N)).reshape(shape)
    X = (np.exp(1j * alpha * delta) * (-1.0) ** (t + d) / n).reshape(shape)
    return Z1, Z2, Z3, X, X.conj().T


def catalog_1d(kind: str, N: int, alpha: Angle, beta: Angle, validate: bool = True,
               p_check: float = 0.5) -> AttractorBasis:
    """Closed-form attractor basis for the coin family on a line or cycle.

    Cycles dispatch on the parity of ``N`` and the exact rationality of
    ``alpha``, which must therefore be an :class:`AlphaRational`. Candidates are
    HS-orthonormalised (order Z1, Z2, Z3, X, Y) and, with ``validate``, each is
    checked to satisfy ``Phi(X) = lambda X``.
    """
    coin = coin_family(alpha, beta)
    b = to_radians(beta)
    if abs(math.sin(2 * b)) < 1e-9:
        raise CatalogError("beta must be generic (sin 2 beta != 0)")
    a = to_radians(alpha)
    Z1, Z2, Z3, X, Y = _catalog_matrices(N, a)
    lam_x, lam_y = np.exp(2j * b), np.exp(-2j * b)
    if kind == "line":
        case = "line"
        graph = make_line(N)
    elif kind == "cycle":
        if not isinstance(alpha, AlphaRational):
            raise CatalogError("cycle case dispatch needs an exact AlphaRational alpha")
        case = cycle_case(N, alpha)
        graph = make_cycle(N)
    else:
        raise CatalogError(f"unknown kind {kind!r}")

    if case in ("line", "cycle-even-special"):
        stationary = [Z1, Z2, Z3]
        rotating = [(lam_x, X), (lam_y, Y)]
    elif case == "cycle-odd-special":
        stationary = [Z1, (Z2 + np.exp(1j * a * (N - 1)) * Z3) / math.sqrt(2)]
        rotating = []
    elif case == "cycle-N2":
        stationary = [Z1, Z3]
        rotating = []
    else:
        stationary = [Z1]
        rotating = []

    lams, mats = [], []
    for M in modified_gram_schmidt(stationary):
        lams.append(1.0 + 0j)
        mats.append(M)
    for lam, M in rotating:
        lams.append(lam)
        mats.append(M / np.linalg.norm(M))
    basis = AttractorBasis(np.array(lams), mats, [exact_phase(l, coin) for l in lams], case,
                           {"method": "catalog", "kind": kind, "N": N})
    if validate:
        residuals = eigen_residuals(basis, graph, coin, p=p_check)
        bad = [i for i, r in enumerate(residuals) if r > RESIDUAL_TOL]
        if bad:
            raise CatalogError(
                f"closed-form basis for {case} (N={N}) fails eigen-validation: "
                f"max residual {max(residuals):.3e}"
            )
        if len(mats) != CASE_DIMENSION[case]:
            raise CatalogError(f"{case}: expected dimension {CASE_DIMENSION[case]}, got {len(mats)}")
    return basis


def eigen_residuals(basis: AttractorBasis, g: PercolationGraph, C: CoinOperator,
                    R: Optional[ReflectionOperator] = None, p: float = 0.5) -> list:
    """``max |Phi(X) - lambda X|`` for each basis element."""
    ch = LocalChannel(g, C, R or default_reflection(g), p)
    return [float(np.max(np.abs(ch.apply(X) - lam * X))) for lam, X in basis.items]


# -- asymptotics ----------------------------------------------------------------------------------

def asymptotic_state(basis: AttractorBasis, rho0: np.ndarray, n: int) -> np.ndarray:
    """``sum_i lambda_i^n Tr(X_i^dagger rho0) X_i``."""
    out = np.zeros_like(basis.matrices[0])
    for lam, X in basis.items:
        out = out + lam**n * np.vdot(X, rho0) * X
    return out


@dataclass
class Classification:
    kind: str  # "stationary" | "periodic" | "quasi-periodic"
    period: Optional[int]
    active: list  # distinct active eigenvalues

    def __str__(self) -> str:
        tag = f"periodic({self.period})" if self.kind == "periodic" else self.kind
        lams = ", ".join("{:+.6f}{:+.6f}i".format(round(l.real, 6) + 0.0, round(l.imag, 6) + 0.0)
                         for l in self.active)
        return f"{tag}; active eigenvalues: {lams}"


def classify_asymptotics(basis: AttractorBasis, rho0: np.ndarray, tol: float = 1e-10) -> Classification:
    """Stationary, periodic with minimal period, or quasi-periodic.

    A period is only claimed when every active phase is known exactly.
    """
    coef = basis.coefficients(rho0)
    active = [i for i, c in enumerate(coef) if abs(c) > tol]
    lams = np.asarray(basis.eigenvalues)[active]
    distinct = [lam for lam, _ in _clusters(lams, CLUSTER_TOL)] if active else []
    if all(abs(l - 1.0) < UNIT_TOL for l in distinct):
        return Classification("stationary", 1, distinct)
    phases = [basis.phases[i] for i in active]
    if all(f is not None for f in phases):
        T = 1
        for f in phases:
            T = T * f.denominator // math.gcd(T, f.denominator)
        return Classification("periodic", T, distinct)
    return Classification("quasi-periodic", None, distinct)


def time_averaged_state(basis: AttractorBasis, rho0: np.ndarray) -> np.ndarray:
    """Cesaro mean of the asymptotic orbit: the ``lambda = 1`` projection."""
    out = np.zeros_like(basis.matrices[0])
    for lam, X in basis.items:
        if abs(lam - 1.0) < UNIT_TOL:
            out = out + np.vdot(X, rho0) * X
    return out
