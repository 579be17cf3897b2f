"""``rfs`` command line front end.

Exit codes: 0 success, 1 usage, 2 model/validation problems, 3 solver
failure, 4 file I/O.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path


from . import patterns
from .errors import GeneratorError, InitializationError, ModelParseError, RigidFoldError
from .geometry import export_frame, export_trajectory_csv, fold_geometry, read_trajectory_csv
from .model import dumps_model, import_fold, parse_model
from .pipeline import Mechanism
from .policy import NumericPolicy
from .solver import STEP_UNDERFLOW, SolverConfig, load_config, simulate
from .validation import validate_model

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3, 4

log = logging.getLogger("rigidfold")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x):
    x = float(x)
    if x == 0:
        x = 0.0
    return format(x, ".10g")


def _vec(v):
    return " ".join(_num(c) for c in v)


def _policy(args):
    tol = getattr(args, "rank_tol", None)
    return NumericPolicy(rank_tol=tol) if tol is not None else NumericPolicy()


def _load_theta(args, mech):
    if getattr(args, "trajectory", None) is None:
        return mech.zeros()
    frames, thetas, _, _ = read_trajectory_csv(args.trajectory)
    if args.frame not in frames:
        raise ModelParseError(f"frame {args.frame} not in {args.trajectory}", field="frame")
    theta = thetas[frames.index(args.frame)]
    if theta.shape != (mech.n_hinges,):
        raise ModelParseError(
            f"trajectory has {theta.size} angles but the model has {mech.n_hinges} hinges")
    return theta


def analysis_lines(mech, theta, rank_tol=None):
    """Line-oriented ``key: value`` report of graph, loops, screws and A."""
    g, basis = mech.graph, mech.basis
    out = [
        f"sheets: {len(mech.model.sheets)}",
        f"facets: {mech.model.n_facets}",
        f"bodies: {len(g.nodes)}",
        f"hinges: {mech.n_hinges}",
        f"active: {mech.active.n_active}",
        f"free: {len(mech.active.free)}",
        f"loops: {basis.L}",
        f"loops_nonperforated: {basis.L_o}",
        f"loops_perforated: {basis.L_k}",
        f"basis_weight: {basis.total_weight}",
    ]
    for lp in basis.loops:
        dirs = ",".join("+" if d > 0 else "-" for d in lp.directions)
        line = (f"loop {lp.id}: weight {lp.weight} {lp.perforation} "
                f"hinges {','.join(map(str, lp.hinges))} directions {dirs}")
        if lp.common_vertex is not None:
            line += f" vertex {_vec(lp.common_vertex)}"
        out.append(line)
    for hs, e in zip(mech.hinge_screws, g.edges):
        origin = (f"sheet {e.sheet} edge {e.edge_index if e.edge_index is not None else '-'}"
                  if e.kind == "intra" else f"connection {e.connection}")
        line = (f"hinge {e.id}: {e.kind} {origin} pair {hs.oriented_pair[0]}->"
                f"{hs.oriented_pair[1]} omega {_vec(hs.omega)} q {_vec(e.point)} "
                f"polarity {hs.polarity_source}")
        if hs.discrepancy:
            line += " discrepancy"
        out.append(line)
    r, dof_a, dof_t = mech.dof(theta, rank_tol)
    shape = mech.pfaffian(theta, rank_tol).A.shape
    out += [f"A: {shape[0]}x{shape[1]}", f"rank: {r}", f"dof_active: {dof_a}",
            f"dof_total: {dof_t}"]
    return out


def cmd_validate(args):
    model = parse_model(args.model)
    rep = validate_model(model, _policy(args))
    print(rep.format())
    return EXIT_OK if rep.ok else EXIT_VALIDATION


def _mechanism(args):
    model = parse_model(args.model)
    rep = validate_model(model, _policy(args))
    if not rep.ok:
        print(rep.format())
        return None
    return Mechanism(model, _policy(args))


def cmd_analyze(args):
    mech = _mechanism(args)
    if mech is None:
        return EXIT_VALIDATION
    theta = _load_theta(args, mech)
    print("\n".join(analysis_lines(mech, theta, args.rank_tol)))
    return EXIT_OK


def cmd_simulate(args):
    mech = _mechanism(args)
    if mech is None:
        return EXIT_VALIDATION
    config = load_config(args.config, mech) if args.config else SolverConfig()
    if args.steps is not None:
        config.steps = args.steps
    if args.rank_tol is not None:
        config.rank_tol = args.rank_tol
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    theta0 = _load_theta(args, mech)
    log.info("simulating %d steps over %d hinges", config.steps, mech.n_hinges)
    traj = simulate(mech, config, theta0)
    export_trajectory_csv(traj, out / "trajectory.csv")
    for f in traj.frames:
        if f.index % args.every == 0 or f is traj.frames[-1]:
            state = fold_geometry(mech.graph, mech.hinge_screws, f.theta)
            export_frame(state, args.format, out / f"frame_{f.index:04d}.{args.format}")
    log.info("termination: %s after %d frames", traj.termination, len(traj.frames) - 1)
    print(f"frames: {len(traj.frames)}")
    print(f"termination: {traj.termination}")
    print(f"running_dof: {traj.running_dof()}")
    print(f"singular_frames: {','.join(map(str, traj.singular_frames())) or '-'}")
    return EXIT_SOLVER if traj.termination == STEP_UNDERFLOW else EXIT_OK


def cmd_export(args):
    mech = _mechanism(args)
    if mech is None:
        return EXIT_VALIDATION
    theta = _load_theta(args, mech)
    state = fold_geometry(mech.graph, mech.hinge_screws, theta)
    export_frame(state, args.format, args.out)
    return EXIT_OK


def cmd_generate(args):
    p = args.pattern
    kw = {}
    if p == "miura":
        model = patterns.gen_miura(args.rows, args.cols, args.a, args.b, args.alpha, args.tilt or 0.0)
    elif p == "stacked-miura":
        heights = [float(x) for x in args.heights.split(",")] if args.heights else None
        model = patterns.gen_stacked_miura(args.layers, args.rows, args.cols, args.a, args.b,
                                           args.alpha, 0.4 if args.tilt is None else args.tilt,
                                           heights, args.connect)
    elif p == "tmp":
        model = patterns.gen_tmp(args.rows)
    elif p == "kirigami-slit":
        model = patterns.gen_kirigami_slit(args.width, args.hole_w, args.hole_h)
    elif p == "thick-miura":
        model = patterns.gen_thick_miura(args.rows, args.cols, args.offset, args.a, args.b,
                                         args.alpha, args.tilt or 0.0)
    elif p == "degree4":
        if args.sectors:
            kw["sectors"] = [float(x) for x in args.sectors.split(",")]
        model = patterns.gen_degree4_vertex(**kw)
    else:
        model = patterns.gen_grid(args.cols, args.rows)
    _write_text(args.out, dumps_model(model))
    return EXIT_OK


def cmd_import_fold(args):
    model = import_fold(args.fold)
    _write_text(args.out, dumps_model(model))
    return EXIT_OK


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def build_parser():
    ap = _Parser(prog="rfs", description="Loop-closure kinematics of rigid foldable structures.")
    ap.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_cmd(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("model", help="model file (JSON)")
        sp.add_argument("--rank-tol", type=float, default=None)
        return sp

    model_cmd("validate", "check a model file").set_defaults(func=cmd_validate)

    sp = model_cmd("analyze", "graph, loops, screws, rank and dof")
    sp.add_argument("--trajectory", help="trajectory CSV to take angles from")
    sp.add_argument("--frame", type=int, default=0)
    sp.set_defaults(func=cmd_analyze)

    sp = model_cmd("simulate", "trace a folding trajectory")
    sp.add_argument("--config", help="solver config file (JSON)")
    sp.add_argument("--trajectory", help="trajectory CSV holding the start angles")
    sp.add_argument("--frame", type=int, default=0, help="start frame in --trajectory")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--steps", type=int)
    sp.add_argument("--every", type=int, default=10, help="geometry export interval")
    sp.add_argument("--format", choices=("obj", "vtk"), default="obj")
    sp.set_defaults(func=cmd_simulate)

    sp = model_cmd("export", "write folded geometry for one set of angles")
    sp.add_argument("--trajectory", help="trajectory CSV (default: home angles)")
    sp.add_argument("--frame", type=int, default=0)
    sp.add_argument("--format", choices=("obj", "vtk"), default="obj")
    sp.add_argument("--out", required=True, help="output geometry file")
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("generate", help="write a generated pattern")
    sp.add_argument("pattern", choices=sorted(patterns.GENERATORS))
    sp.add_argument("-o", "--out", required=True, help="output model file or - for stdout")
    sp.add_argument("--rows", type=int, default=1)
    sp.add_argument("--cols", type=int, default=1)
    sp.add_argument("--layers", type=int, default=2)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--alpha", type=float, default=math.pi / 3, help="sector angle, radians")
    sp.add_argument("--tilt", type=float, default=None,
                    help="home fold parameter, radians (stacked-miura default 0.4, else 0)")
    sp.add_argument("--heights", help="comma separated layer heights")
    sp.add_argument("--connect", choices=("all", "alternate"), default="all")
    sp.add_argument("--offset", type=float, default=0.1, help="panel thickness")
    sp.add_argument("--width", type=float, default=1.0)
    sp.add_argument("--hole-w", type=float, default=1.0)
    sp.add_argument("--hole-h", type=float, default=1.0)
    sp.add_argument("--sectors", help="comma separated sector angles, radians")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("import-fold", help="convert a FOLD file to a model file")
    sp.add_argument("fold")
    sp.add_argument("-o", "--out", required=True)
    sp.set_defaults(func=cmd_import_fold)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    if getattr(args, "every", 1) < 1:
        ap.error("--every must be at least 1")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"rfs: {exc}", file=sys.stderr)
        return EXIT_IO
    except InitializationError as exc:
        print(f"rfs: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ModelParseError, GeneratorError) as exc:
        print(f"rfs: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RigidFoldError as exc:
        print(f"rfs: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
