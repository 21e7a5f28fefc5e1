"""Coins, reflections, step operators, walk unitaries and initial states.

Basis convention: ``|a, b> = |a> (x) |b>`` has flat index ``a*d + b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from .graph import ABSENT, EdgeConfig, PercolationGraph

DENSE_LIMIT = 64
UNITARY_TOL = 1e-12
DEGENERATE_BETA_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


class WalkError(ValueError):
    pass


@dataclass(frozen=True)
class AlphaRational:
    """An angle ``numerator * pi / denominator`` kept exact.

    Used for any coin angle whose rationality matters (alpha for the cycle
    case table, beta for exact periods).
    """

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator == 0:
            raise ValueError("denominator must be nonzero")
        f = Fraction(self.numerator, self.denominator)
        object.__setattr__(self, "numerator", f.numerator)
        object.__setattr__(self, "denominator", f.denominator)

    @classmethod
    def parse(cls, text: str) -> "AlphaRational":
        """Parse ``"l/m"`` or ``"l"`` (units of pi)."""
        f = Fraction(text.strip())
        return cls(f.numerator, f.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def radians(self) -> float:
        return math.pi * self.numerator / self.denominator

    def __float__(self) -> float:
        return self.radians

    def __str__(self) -> str:
        if self.denominator == 1:
            return f"{self.numerator}pi"
        return f"{self.numerator}pi/{self.denominator}"


Angle = Union[float, AlphaRational]


def to_radians(x: Angle) -> float:
    return x.radians if isinstance(x, AlphaRational) else float(x)


@dataclass(frozen=True)
class CoinOperator:
    matrix: np.ndarray
    alpha: Optional[Angle] = None
    beta: Optional[Angle] = None

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def from_family(self) -> bool:
        return self.alpha is not None and self.beta is not None


@dataclass(frozen=True)
class ReflectionOperator:
    """Coin-space permutation used when the required edge is missing.

    ``perm[c]`` is the coin state that ``c`` is sent to.
    """

    perm: tuple

    @property
    def d(self) -> int:
        return len(self.perm)

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((self.d, self.d), dtype=complex)
        m[list(self.perm), range(self.d)] = 1.0
        return m

    @property
    def is_traceless(self) -> bool:
        return all(self.perm[c] != c for c in range(self.d))

    @classmethod
    def from_matrix(cls, m) -> "ReflectionOperator":
        m = np.asarray(m)
        d = m.shape[0]
        if m.shape != (d, d):
            raise WalkError("reflection must be square")
        is01 = np.all((np.abs(m) < 1e-12) | (np.abs(m - 1) < 1e-12))
        if not is01 or not np.allclose(m.sum(axis=0), 1) or not np.allclose(m.sum(axis=1), 1):
            raise WalkError("reflection must be a permutation matrix")
        return cls(tuple(int(np.argmax(np.abs(m[:, c]))) for c in range(d)))


def sigma_x_reflection() -> ReflectionOperator:
    return ReflectionOperator((1, 0))


def default_reflection(g: PercolationGraph) -> ReflectionOperator:
    if g.d == 2:
        return sigma_x_reflection()
    raise WalkError(f"no default reflection for d={g.d}; supply one explicitly")


def reverse_direction_reflection(g: PercolationGraph) -> ReflectionOperator:
    """Reflection sending each direction to its reverse, if that is vertex-independent.

    This is the only permutation that makes every step operator unitary for
    the label-preserving shift. For odd ``d`` it necessarily has a fixed point.
    """
    perm = [None] * g.d
    for a in range(g.N):
        for c in range(g.d):
            b = g.neighbor(a, c)
            if b == ABSENT:
                continue
            rev = int(np.flatnonzero(g.neighbors[b] == a)[0])
            if perm[c] is None:
                perm[c] = rev
            elif perm[c] != rev:
                raise WalkError("reverse direction depends on the vertex; no consistent reflection")
    if any(x is None for x in perm):
        raise WalkError("some direction is never used")
    return ReflectionOperator(tuple(perm))


def coin_family(alpha: Angle, beta: Angle) -> CoinOperator:
    """Two-parameter qubit coin ``[[i e^{-ia} sin b, cos b], [cos b, i e^{ia} sin b]]``.

    ``alpha = pi/2, beta = pi/4`` gives the Hadamard coin.
    """
    a, b = to_radians(alpha), to_radians(beta)
    if abs(math.remainder(b - math.pi / 2, math.pi)) < DEGENERATE_BETA_TOL:
        raise WalkError("degenerate coin out of scope: beta = pi/2")
    m = np.array(
        [
            [1j * np.exp(-1j * a) * np.sin(b), np.cos(b)],
            [np.cos(b), 1j * np.exp(1j * a) * np.sin(b)],
        ],
        dtype=complex,
    )
    # exact zeros/ones for rational angles keep the Hadamard case clean
    m.real[np.abs(m.real) < 1e-15] = 0.0
    m.imag[np.abs(m.imag) < 1e-15] = 0.0
    return CoinOperator(m, alpha, beta)


def hadamard() -> CoinOperator:
    return coin_family(AlphaRational(1, 2), AlphaRational(1, 4))


def coin_from_matrix(m) -> CoinOperator:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise WalkError("coin must be square")
    if np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) > 1e-10:
        raise WalkError("coin is not unitary")
    return CoinOperator(m)


def rc_spectrum(C: CoinOperator, R: ReflectionOperator) -> np.ndarray:
    """Eigenvalues of ``R C`` sorted by phase in ``[0, 2 pi)``."""
    if C.d != R.d:
        raise WalkError("coin and reflection dimensions differ")
    ev = np.linalg.eigvals(R.matrix @ C.matrix)
    return ev[np.argsort(np.mod(np.angle(ev), 2 * np.pi))]


# -- step operator --------------------------------------------------------------

@dataclass(frozen=True)
class SlotTables:
    """Per-slot transition tables of the step operator.

    For input slot ``j = a*d + c``: ``present[j]`` is its image when its edge
    is present, ``absent[j]`` its image when missing, ``edge[j]`` the governing
    EdgeId (``ABSENT`` for permanently broken slots).
    """

    present: np.ndarray
    absent: np.ndarray
    edge: np.ndarray


def slot_tables(g: PercolationGraph, R: ReflectionOperator) -> SlotTables:
    if R.d != g.d:
        raise WalkError("reflection dimension differs from graph regularity")
    d = g.d
    a = np.repeat(np.arange(g.N), d)
    c = np.tile(np.arange(d), g.N)
    nb = g.neighbors[a, c]
    present = np.where(nb == ABSENT, -1, nb * d + c)
    absent = a * d + np.asarray(R.perm)[c]
    edge = g.edge_ids[a, c].copy()
    return SlotTables(present, absent, edge)


def step_permutation(tables: SlotTables, present_mask: np.ndarray) -> np.ndarray:
    """Image of each slot under the step operator for a boolean edge mask."""
    on = np.zeros(tables.edge.shape, dtype=bool)
    real = tables.edge != ABSENT
    on[real] = present_mask[tables.edge[real]]
    return np.where(on, tables.present, tables.absent)


def _check_permutation(perm: np.ndarray) -> None:
    if np.bincount(perm, minlength=perm.size).max() != 1:
        raise WalkError("reflection operator incompatible with direction labeling")


def check_reflection_compatible(tables: SlotTables) -> None:
    """Raise unless every configuration's step operator is a permutation.

    The all-missing step is a permutation by construction. Toggling one edge
    only moves the slots it governs, so every step is a permutation iff those
    slots hit the same set of targets whether the edge is present or not.
    """
    _check_permutation(tables.absent)
    real = tables.edge != ABSENT
    order = np.argsort(tables.edge[real], kind="stable")
    slots = np.flatnonzero(real)[order]
    edges = tables.edge[slots]
    for group in np.split(slots, np.flatnonzero(np.diff(edges)) + 1):
        if group.size and not np.array_equal(np.sort(tables.present[group]), np.sort(tables.absent[group])):
            raise WalkError("reflection operator incompatible with direction labeling")


def step_operator(g: PercolationGraph, k: EdgeConfig, R: Optional[ReflectionOperator] = None):
    """Sparse permutation matrix of the step operator for configuration ``k``.

    A slot whose edge is present moves to ``|a (+) c, c>``; otherwise it is
    reflected in place by ``R``.
    """
    R = R or default_reflection(g)
    k.check(g)
    perm = step_permutation(slot_tables(g, R), k.as_bool(g))
    _check_permutation(perm)
    n = g.dim
    return sp.csr_matrix((np.ones(n), (perm, np.arange(n))), shape=(n, n), dtype=complex)


def coin_full(g: PercolationGraph, C: CoinOperator):
    """``I_P (x) C`` as a sparse matrix."""
    if C.d != g.d:
        raise WalkError("coin dimension differs from graph regularity")
    return sp.kron(sp.identity(g.N, format="csr"), sp.csr_matrix(C.matrix), format="csr")


@dataclass(frozen=True)
class WalkUnitary:
    matrix: object
    config: EdgeConfig

    def dense(self) -> np.ndarray:
        m = self.matrix
        return m.toarray() if sp.issparse(m) else np.asarray(m)


def walk_unitary(S, C: CoinOperator, config: Optional[EdgeConfig] = None) -> WalkUnitary:
    """``U = S (I_P (x) C)``: coin first, then shift."""
    n = S.shape[0]
    d = C.d
    if n % d:
        raise WalkError("incompatible dimensions")
    coin = sp.kron(sp.identity(n // d), sp.csr_matrix(C.matrix), format="csr")
    U = sp.csr_matrix(S) @ coin
    if n <= DENSE_LIMIT:
        U = U.toarray()
    return WalkUnitary(U, config if config is not None else EdgeConfig(0))


def walk_unitary_for(g: PercolationGraph, C: CoinOperator, k: EdgeConfig,
                     R: Optional[ReflectionOperator] = None) -> WalkUnitary:
    return walk_unitary(step_operator(g, k, R), C, k)


# -- states -----------------------------------------------------------------------

def bloch_state(theta: float, phi: float) -> np.ndarray:
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)


def localized_initial_state(g: PercolationGraph, x0: int, theta: Angle = 0.0, phi: Angle = 0.0,
                            P: float = 1.0) -> np.ndarray:
    """``|x0><x0| (x) (P |psi><psi| + (1-P) I/2)`` with a Bloch-sphere coin state."""
    if g.d != 2:
        raise WalkError("Bloch initial state needs a qubit coin (d = 2)")
    if not 0.0 <= P <= 1.0:
        raise WalkError(f"P must lie in [0, 1], got {P}")
    if not 0 <= x0 < g.N:
        raise WalkError(f"x0={x0} is not a vertex")
    psi = bloch_state(to_radians(theta), to_radians(phi))
    coin = P * np.outer(psi, psi.conj()) + 0.5 * (1.0 - P) * np.eye(2)
    pos = np.zeros((g.N, g.N))
    pos[x0, x0] = 1.0
    return np.kron(pos, coin)


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex) / n


def check_density_matrix(rho: np.ndarray, tol: float = 1e-12, psd_tol: float = 1e-10,
                         check_psd: bool = True) -> None:
    """Raise ``WalkError`` if ``rho`` is not Hermitian, unit-trace and PSD."""
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise WalkError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise WalkError(f"density matrix trace is {np.trace(rho).real!r}")
    if check_psd and np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -psd_tol:
        raise WalkError("density matrix has a negative eigenvalue")
