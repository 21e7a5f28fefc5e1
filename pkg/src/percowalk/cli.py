"""Command-line experiment runner.

Subcommands ``run``, ``attractors``, ``mixing`` and ``classify`` share the
graph/coin/state flags. Angles given with ``--*-pi l/m`` are exact rational
multiples of pi; ``--*-rad`` takes raw radians. A JSON ``--config`` file may
supply any option; explicit flags win.

Exit codes: 0 success, 2 configuration error, 3 numerical guard,
4 convergence/horizon error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, attractors, channel, graph, io, walk

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_HORIZON = 0, 2, 3, 4

log = logging.getLogger("percowalk")


class ConfigError(ValueError):
    pass


# -- config assembly -------------------------------------------------------------------------------

def _parse_init(text: str) -> dict:
    out = {}
    for part in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in part:
            raise ConfigError(f"--init entry {part!r} is not key=value")
        k, v = (s.strip() for s in part.split("=", 1))
        if k.endswith("-pi"):
            out[k[:-3] + "_pi"] = v
        elif k in ("x0",):
            out[k] = int(v)
        elif k in ("theta", "phi", "P"):
            out[k] = float(v)
        else:
            raise ConfigError(f"unknown --init key {k!r}")
    return out


def _merge(args) -> dict:
    cfg = io.load_json(args.config) if args.config else {}
    cfg = dict(cfg)
    gspec = dict(cfg.get("graph", {}))
    if args.graph:
        if args.graph.startswith("general:"):
            gspec = io.load_json(args.graph.split(":", 1)[1])
            gspec.setdefault("kind", "general")
        else:
            gspec["kind"] = args.graph
    if args.N is not None:
        gspec["N"] = args.N
    cfg["graph"] = gspec

    cspec = dict(cfg.get("coin", {}))
    if args.coin and args.coin.startswith("matrix:"):
        cspec = io.load_json(args.coin.split(":", 1)[1])
    else:
        fam = dict(cspec.get("family", {}))
        if args.alpha_pi is not None:
            fam.pop("alpha", None)
            fam["alpha_pi"] = args.alpha_pi
        if args.alpha_rad is not None:
            fam.pop("alpha_pi", None)
            fam["alpha"] = args.alpha_rad
        if args.beta_pi is not None:
            fam.pop("beta", None)
            fam["beta_pi"] = args.beta_pi
        if args.beta_rad is not None:
            fam.pop("beta_pi", None)
            fam["beta"] = args.beta_rad
        if fam or args.coin == "family" or not cspec:
            if "alpha" not in fam:
                fam.setdefault("alpha_pi", "1/2")
            if "beta" not in fam:
                fam.setdefault("beta_pi", "1/4")
            cspec = {"family": fam}
    cfg["coin"] = cspec

    init = dict(cfg.get("init", {}))
    if args.init:
        init.update(_parse_init(args.init))
    cfg["init"] = init
    for key in ("p", "seed", "out", "workers", "reflection"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in ("steps", "method", "trajectories", "eps_grid", "check", "use_case_table",
                "uniform_reference"):
        val = getattr(args, key, None)
        if val not in (None, False):
            cfg[key] = val
    return cfg


def _build(cfg: dict):
    if "kind" not in cfg["graph"]:
        raise ConfigError("no graph given (--graph)")
    g = io.graph_spec(cfg["graph"])
    C = io.coin_spec(cfg["coin"])
    refl = cfg.get("reflection")
    if refl is None:
        R = walk.default_reflection(g)
    elif refl == "reverse":
        R = walk.reverse_direction_reflection(g)
    else:
        perm = refl if isinstance(refl, list) else [int(x) for x in str(refl).split(",")]
        R = walk.ReflectionOperator(tuple(perm))
    rho0 = io.initial_state_spec(g, cfg["init"]) if g.d == 2 else None
    p = float(cfg.get("p", 0.5))
    return g, C, R, p, rho0


def _out(cfg):
    return cfg.get("out") or sys.stdout


# -- subcommands -----------------------------------------------------------------------------------

def cmd_run(cfg: dict) -> int:
    g, C, R, p, rho0 = _build(cfg)
    steps = int(cfg.get("steps", 100))
    method = cfg.get("method", "local")
    if method == "mc":
        traj = channel.monte_carlo_evolve(g, C, R, p, rho0, steps, int(cfg.get("trajectories", 1000)),
                                          int(cfg.get("seed", 0)), int(cfg.get("workers", 1)))
    else:
        traj = channel.evolve(g, C, R, p, rho0, steps, method=method)
    io.write_trajectory_csv(traj, _out(cfg), d=g.d)
    return EXIT_OK


def _basis(g, C, R, p, cfg):
    if cfg.get("use_case_table"):
        if g.kind not in ("line", "cycle") or not C.from_family:
            raise ConfigError("--use-case-table needs a line or cycle with a family coin")
        if g.kind == "cycle" and not isinstance(C.alpha, walk.AlphaRational):
            raise ConfigError("--use-case-table on a cycle needs an exact --alpha-pi l/m")
        return attractors.catalog_1d(g.kind, g.N, C.alpha, C.beta)
    return attractors.solve_attractors_spectral(channel.build_superoperator(g, C, R, p))


def _cfmt(z: complex, digits: int = 12) -> str:
    re_, im_ = (round(float(x), digits) + 0.0 for x in (z.real, z.imag))
    return f"{re_:+.{digits}f}{im_:+.{digits}f}i"


def cmd_attractors(cfg: dict) -> int:
    g, C, R, p, _ = _build(cfg)
    basis = _basis(g, C, R, p, cfg)
    case = basis.case or attractors.graph_case(g, C) or "unclassified"
    print(f"dimension {basis.dimension}, case {case}")
    for lam in basis.distinct_eigenvalues():
        mult = basis.subspace(lam).shape[1]
        print(f"  eigenvalue {_cfmt(lam)}  multiplicity {mult}")
    if cfg.get("check"):
        two = attractors.solve_attractors_twostep(g, C, R)
        spec = basis if basis.meta.get("method") == "spectral" else attractors.solve_attractors_spectral(
            channel.build_superoperator(g, C, R, p))
        print(f"check spectral vs two-step: max angle {attractors.max_basis_angle(spec, two):.3e}")
        if g.kind in ("line", "cycle") and C.from_family and (
                g.kind == "line" or isinstance(C.alpha, walk.AlphaRational)):
            try:
                cat = attractors.catalog_1d(g.kind, g.N, C.alpha, C.beta)
                print(f"check spectral vs catalog: max angle {attractors.max_basis_angle(spec, cat):.3e}")
            except attractors.CatalogError as exc:
                print(f"check catalog: {exc}")
    if cfg.get("out"):
        io.write_attractors_json(basis, cfg["out"])
    return EXIT_OK


def _eps_grid(text) -> np.ndarray:
    if isinstance(text, list):
        return np.asarray(text, dtype=float)
    parts = [float(x) for x in str(text).split(",")]
    if len(parts) == 3 and parts[2] == int(parts[2]) and parts[2] > 2:
        return np.logspace(np.log10(parts[0]), np.log10(parts[1]), int(parts[2]))
    return np.asarray(parts)


def cmd_mixing(cfg: dict) -> int:
    g, C, R, p, rho0 = _build(cfg)
    phi = channel.build_superoperator(g, C, R, p)
    basis = attractors.solve_attractors_spectral(phi)
    verdict = attractors.classify_asymptotics(basis, rho0)
    if verdict.kind != "stationary":
        raise analysis.MixingError(f"no mixing time for a {verdict.kind} limit")
    eps = _eps_grid(cfg.get("eps_grid", "0.001,0.1,20"))
    steps = int(cfg.get("steps", 400))
    traj = channel.evolve(g, C, R, p, rho0, steps, keep_states=False)
    ref = analysis.mixing_reference(basis, rho0, g.d, use_uniform=bool(cfg.get("uniform_reference")))
    pos = analysis.position_marginal(traj.diagonals, g.d)
    report = analysis.mixing_time_estimate(phi, rho0, eps)
    report.t_measured = analysis.mixing_times(pos, eps, ref)
    io.write_mixing_csv(report, _out(cfg))
    return EXIT_OK


def cmd_classify(cfg: dict) -> int:
    g, C, R, p, rho0 = _build(cfg)
    basis = _basis(g, C, R, p, cfg)
    verdict = attractors.classify_asymptotics(basis, rho0)
    line = str(verdict)
    if verdict.kind == "stationary":
        lim = attractors.asymptotic_state(basis, rho0, 0)
        mixed = analysis.trace_distance(lim, walk.maximally_mixed(g.dim)) < 1e-10
        line += "; maximally mixed" if mixed else "; not maximally mixed"
    print(line)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "attractors": cmd_attractors, "mixing": cmd_mixing,
            "classify": cmd_classify}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, help="JSON config file; flags override it")
    shared.add_argument("--graph", help="cycle | line | general:<file.json>")
    shared.add_argument("--N", type=int)
    shared.add_argument("--coin", help="family | matrix:<file.json>")
    shared.add_argument("--alpha-pi", help="alpha as l/m (units of pi)")
    shared.add_argument("--alpha-rad", type=float)
    shared.add_argument("--beta-pi", help="beta as l/m (units of pi)")
    shared.add_argument("--beta-rad", type=float)
    shared.add_argument("--reflection", help="coin permutation 'i,j,...' or 'reverse'")
    shared.add_argument("--p", type=float)
    shared.add_argument("--init", help="x0=0,theta-pi=1/2,phi-pi=-1/2,P=1")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--out")
    shared.add_argument("--workers", type=int)
    shared.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="percowalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[shared], help="evolve and write a trajectory CSV")
    run.add_argument("--steps", type=int)
    run.add_argument("--method", choices=["local", "bruteforce", "matrix", "mc"])
    run.add_argument("--trajectories", type=int)
    att = sub.add_parser("attractors", parents=[shared], help="attractor dimension and JSON dump")
    att.add_argument("--check", action="store_true", help="cross-validate all solvers")
    att.add_argument("--use-case-table", action="store_true")
    mix = sub.add_parser("mixing", parents=[shared], help="measured and estimated mixing times")
    mix.add_argument("--eps-grid", help="lo,hi,n (log-spaced) or explicit comma list")
    mix.add_argument("--steps", type=int)
    mix.add_argument("--uniform-reference", action="store_true")
    cls = sub.add_parser("classify", parents=[shared], help="stationary / periodic / quasi-periodic")
    cls.add_argument("--use-case-table", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _merge(args)
        return COMMANDS[args.command](cfg)
    except analysis.MixingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HORIZON
    except (graph.EnumerationCapError, channel.ChannelError, attractors.AttractorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except walk.WalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if "incompatible" in str(exc) or "unitary" in str(exc) else EXIT_CONFIG
    except (ConfigError, io.SpecError, graph.GraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
