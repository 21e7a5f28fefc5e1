"""Observables, distances and mixing times."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .attractors import AttractorBasis, _clusters, null_space, time_averaged_state
from .channel import Superoperator, Trajectory

log = logging.getLogger(__name__)

OVERLAP_TOL = 1e-10


class MixingError(ValueError):
    pass


class HorizonError(MixingError):
    pass


def joint_distribution(rho: np.ndarray) -> np.ndarray:
    """Joint position-coin distribution: the diagonal of ``rho``."""
    return np.real(np.diag(rho)).copy()


def position_marginal(rho_or_joint: np.ndarray, d: int = 2) -> np.ndarray:
    """Sum coin states per vertex. Accepts a density matrix or joint distribution(s)."""
    x = np.asarray(rho_or_joint)
    if x.ndim == 2 and x.shape[0] == x.shape[1]:
        x = joint_distribution(x)
    return x.reshape(x.shape[:-1] + (-1, d)).sum(axis=-1)


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def manhattan(p: np.ndarray, r: np.ndarray) -> float:
    """``sum_i |p_i - r_i|``."""
    p, r = np.asarray(p), np.asarray(r)
    if p.shape != r.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {r.shape}")
    return float(np.abs(p - r).sum())


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Trace norm ``||a - b||_1`` (sum of singular values, no 1/2 factor)."""
    return float(np.linalg.svd(a - b, compute_uv=False).sum())


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho, rho)))


def asymptotic_purity_localized(N: int, P: float) -> float:
    """Purity ``1/(2N) + P^2/(2N^2)`` of the limit reached from a localized state."""
    if not 0.0 <= P <= 1.0:
        raise ValueError("P must lie in [0, 1]")
    return 1.0 / (2 * N) + P**2 / (2 * N**2)


def fidelity_mixed(rho: np.ndarray, n: Optional[int] = None) -> float:
    """Fidelity with ``I/n``: ``(sum_i sqrt(eig_i / n))^2``."""
    n = n or rho.shape[0]
    ev = np.clip(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)), 0.0, None)
    return float(np.sum(np.sqrt(ev / n)) ** 2)


# -- mixing time ---------------------------------------------------------------------------

def mixing_time_measured(distributions: np.ndarray, eps: float, reference: np.ndarray,
                         tail_fraction: float = 0.1) -> int:
    """First step after which every later distribution stays within ``eps`` of ``reference``.

    ``distributions`` has one row per step. Raises :class:`HorizonError` when
    the final ``tail_fraction`` of the record is not yet inside ``eps``.
    """
    dist = np.abs(np.asarray(distributions) - np.asarray(reference)[None, :]).sum(axis=1)
    return _mixing_from_distances(dist, eps, tail_fraction)


def _mixing_from_distances(dist: np.ndarray, eps: float, tail_fraction: float = 0.1) -> int:
    T = len(dist)
    tail = max(1, int(np.ceil(tail_fraction * T)))
    if np.any(dist[T - tail:] > eps):
        raise HorizonError("horizon too short: tail not converged")
    above = np.flatnonzero(dist > eps)
    return int(above[-1] + 1) if above.size else 0


def mixing_times(distributions: np.ndarray, eps_grid: Sequence[float], reference: np.ndarray,
                 tail_fraction: float = 0.1) -> np.ndarray:
    dist = np.abs(np.asarray(distributions) - np.asarray(reference)[None, :]).sum(axis=1)
    return np.array([_mixing_from_distances(dist, e, tail_fraction) for e in eps_grid])


def mixing_reference(basis: AttractorBasis, rho0: np.ndarray, d: int = 2,
                     use_uniform: bool = False) -> np.ndarray:
    """Limiting position distribution: time average of the asymptotic orbit, or uniform."""
    n = rho0.shape[0] // d
    if use_uniform:
        return uniform(n)
    return position_marginal(time_averaged_state(basis, rho0), d)


@dataclass
class SlowMode:
    eigenvalue: complex
    multiplicity: int
    overlap: complex
    left_coefficient: complex


@dataclass
class MixingReport:
    """Estimated (and optionally measured) mixing times over an ``eps`` grid."""

    epsilon_grid: np.ndarray
    t_estimated: np.ndarray
    lambda_prime: complex
    overlap: complex
    t_measured: Optional[np.ndarray] = None
    shell: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    eigenbasis_condition: float = float("nan")

    def estimate(self, eps: float) -> float:
        return mixing_time_formula(eps, self.lambda_prime, self.overlap)


def mixing_time_formula(eps, lam_prime: complex, overlap: complex):
    """``log eps / log|lambda'| - log|O| / log|lambda'|``."""
    ln = np.log(abs(lam_prime))
    return np.log(eps) / ln - np.log(abs(overlap)) / ln


def slow_modes(phi: Superoperator, rho0: np.ndarray, unit_tol: float = 1e-8,
               shell_tol: float = 1e-8) -> tuple:
    """Decaying eigenvalues ordered by modulus, with overlaps on ``rho0``.

    Each distinct eigenvalue's eigenspace is HS-orthonormalised; its overlap is
    the largest ``|Tr(X^dagger rho0)|`` over unit ``X`` in the space. Returns
    ``(modes, condition number of the eigenbasis)``.
    """
    M = phi.dense()
    ev, VL, VR = sla.eig(M, left=True, right=True)
    cond = float(np.linalg.cond(VR))
    r = rho0.ravel()
    decaying = np.flatnonzero(np.abs(ev) < 1.0 - unit_tol)
    modes = []
    eye = np.eye(M.shape[0])
    for lam, idx in _clusters(ev[decaying], shell_tol):
        lam = ev[decaying][idx].mean()
        Q = null_space(M - lam * eye, tol=1e-7)
        if Q.shape[1] == 0:
            Q = VR[:, decaying[idx]]
            Q = np.linalg.qr(Q)[0]
        c = Q.conj().T @ r
        k = int(np.argmax(np.abs(c)))
        overlap = c[k] if Q.shape[1] == 1 else np.linalg.norm(c) * np.exp(1j * np.angle(c[k]))
        j = decaying[idx[0]]
        left = np.vdot(VL[:, j], r) / np.vdot(VL[:, j], VR[:, j]) * np.linalg.norm(VR[:, j])
        modes.append(SlowMode(complex(lam), len(idx), complex(overlap), complex(left)))
    modes.sort(key=lambda m: -abs(m.eigenvalue))
    return modes, cond


def mixing_time_estimate(phi: Superoperator, rho0: np.ndarray, eps, overlap_tol: float = OVERLAP_TOL,
                         shell_tol: float = 1e-8) -> MixingReport:
    """Single-mode mixing-time estimate from the slowest decaying mode that ``rho0`` excites.

    Modes with ``|O| <= overlap_tol`` cannot contribute (the formula would
    diverge) and are skipped; they are listed in ``report.skipped``. Within the
    leading shell the member with the largest ``|O|`` is used.
    """
    eps_grid = np.atleast_1d(np.asarray(eps, dtype=float))
    modes, cond = slow_modes(phi, rho0)
    if not modes:
        raise MixingError("no decaying eigenvalues: every eigenvalue lies on the unit circle")
    excited = [m for m in modes if abs(m.overlap) > overlap_tol]
    if not excited:
        raise MixingError("initial state has no overlap with any decaying mode")
    lead = abs(excited[0].eigenvalue)
    shell = [m for m in excited if abs(abs(m.eigenvalue) - lead) < shell_tol]
    best = max(shell, key=lambda m: abs(m.overlap))
    skipped = [m for m in modes if abs(m.eigenvalue) > lead + shell_tol]
    for m in shell:
        log.info("slow mode %s |O|=%.3e left coefficient %.3e", m.eigenvalue, abs(m.overlap),
                 abs(m.left_coefficient))
    log.info("eigenbasis condition number %.3e", cond)
    t_est = mixing_time_formula(eps_grid, best.eigenvalue, best.overlap)
    return MixingReport(eps_grid, t_est, best.eigenvalue, best.overlap, shell=shell,
                        skipped=skipped, eigenbasis_condition=cond)


def position_distances(trajectory: Trajectory, reference: np.ndarray, d: int = 2) -> np.ndarray:
    pos = position_marginal(trajectory.diagonals, d)
    return np.abs(pos - reference[None, :]).sum(axis=1)
