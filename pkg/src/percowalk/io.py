"""JSON specs for graphs, coins and initial states; CSV/JSON result writers."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import IO, Optional, Union

import numpy as np

from .analysis import (
    MixingReport,
    fidelity_mixed,
    manhattan,
    position_marginal,
    purity,
    uniform,
)
from .attractors import AttractorBasis
from .channel import Trajectory
from .graph import PercolationGraph, graph_from_spec
from .walk import (
    AlphaRational,
    CoinOperator,
    coin_family,
    coin_from_matrix,
    localized_initial_state,
)

PathLike = Union[str, Path]


class SpecError(ValueError):
    """Malformed configuration input."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _angle(spec: dict, name: str):
    """Angle from ``<name>_pi`` ("l/m", exact) or ``<name>`` (radians)."""
    if f"{name}_pi" in spec:
        return AlphaRational.parse(str(spec[f"{name}_pi"]))
    if name in spec:
        return float(spec[name])
    raise SpecError(f"missing angle {name!r}")


def load_json(path: PathLike) -> dict:
    with open(path) as fh:
        return json.load(fh)


def graph_spec(spec: dict) -> PercolationGraph:
    try:
        return graph_from_spec(spec)
    except KeyError as exc:
        raise SpecError(f"graph spec missing {exc}") from None


def coin_spec(spec: dict) -> CoinOperator:
    """``{"family": {"alpha": a, "beta": b}}`` or ``{"matrix": [[[re, im], ...], ...]}``."""
    if "family" in spec:
        fam = spec["family"]
        return coin_family(_angle(fam, "alpha"), _angle(fam, "beta"))
    if "matrix" in spec:
        m = np.asarray(spec["matrix"], dtype=float)
        if m.ndim != 3 or m.shape[-1] != 2:
            raise SpecError("coin matrix entries must be [re, im] pairs")
        return coin_from_matrix(m[..., 0] + 1j * m[..., 1])
    raise SpecError("coin spec needs 'family' or 'matrix'")


def initial_state_spec(g: PercolationGraph, spec: dict) -> np.ndarray:
    """``{"x0": int, "theta": rad, "phi": rad, "P": float}``; ``theta_pi``/``phi_pi`` also accepted."""
    theta = _angle(spec, "theta") if ("theta" in spec or "theta_pi" in spec) else 0.0
    phi = _angle(spec, "phi") if ("phi" in spec or "phi_pi" in spec) else 0.0
    return localized_initial_state(g, int(spec.get("x0", 0)), theta, phi, float(spec.get("P", 1.0)))


# -- writers ------------------------------------------------------------------------------------

TRAJECTORY_COLUMNS = ["step", "manhattan_joint_uniform", "manhattan_pos_uniform", "purity",
                      "fidelity_mixed"]


def trajectory_rows(traj: Trajectory, d: int = 2):
    n = traj.diagonals.shape[1]
    N = n // d
    uj, up = uniform(n), uniform(N)
    for t, diag in enumerate(traj.diagonals):
        pos = position_marginal(diag, d)
        if traj.states is not None:
            rho = traj.states[t]
            pur, fid = purity(rho), fidelity_mixed(rho)
        else:
            pur = fid = float("nan")
        yield [t, manhattan(diag, uj), manhattan(pos, up), pur, fid, *pos]


def write_trajectory_csv(traj: Trajectory, out: Union[PathLike, IO], d: int = 2) -> None:
    N = traj.diagonals.shape[1] // d
    header = TRAJECTORY_COLUMNS + [f"pos_prob_{i}" for i in range(N)]
    with _open(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in trajectory_rows(traj, d):
            w.writerow([row[0]] + [_fmt(x) for x in row[1:]])


def write_mixing_csv(report: MixingReport, out: Union[PathLike, IO]) -> None:
    with _open(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epsilon", "t_measured", "t_estimated", "abs_lambda_prime", "abs_overlap"])
        measured = report.t_measured if report.t_measured is not None else [""] * len(report.epsilon_grid)
        for eps, tm, te in zip(report.epsilon_grid, measured, report.t_estimated):
            w.writerow([_fmt(eps), tm if tm == "" else int(tm), _fmt(te),
                        _fmt(abs(report.lambda_prime)), _fmt(abs(report.overlap))])


def _c(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def attractors_to_json(basis: AttractorBasis) -> dict:
    return {
        "dimension": basis.dimension,
        "case": basis.case,
        "items": [
            {"eigenvalue": _c(lam), "matrix": [[_c(z) for z in row] for row in X]}
            for lam, X in basis.items
        ],
    }


def attractors_from_json(data: dict) -> AttractorBasis:
    lams = np.array([complex(i["eigenvalue"]["re"], i["eigenvalue"]["im"]) for i in data["items"]])
    mats = [np.array([[complex(z["re"], z["im"]) for z in row] for row in i["matrix"]])
            for i in data["items"]]
    return AttractorBasis(lams, mats, case=data.get("case"))


def write_attractors_json(basis: AttractorBasis, out: Union[PathLike, IO]) -> None:
    with _open(out) as fh:
        json.dump(attractors_to_json(basis), fh, indent=1)
        fh.write("\n")


class _open:
    """Open a path for writing, or pass an already-open stream through."""

    def __init__(self, target):
        self.target = target
        self.fh: Optional[IO] = None

    def __enter__(self):
        if hasattr(self.target, "write"):
            return self.target
        self.fh = open(self.target, "w", newline="")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()
