"""Command-line entry point: ``coreapprox <command> ...``.

Exit codes: 0 success, 2 configuration or input error, 3 empty core where
that prevents output, 4 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import _jsonio
from .approx import approximate_core, load_vertex_set, save_result
from .bench import build_game, check_allocation_files, emit_table, load_config, run_all
from .directions import DirectionScheme
from .errors import CapacityError, CoreApproxError, SolverFailure
from .games import load_game, save_game, shapley_value
from .geometry import convex_hull, volume
from .lp import check_nonempty
from .metrics import evaluate
from .oracle import MAX_NAIVE_PLAYERS, enumerate_vertices_naive, saturation_reference

EXIT_OK, EXIT_CONFIG, EXIT_EMPTY, EXIT_SOLVER = 0, 2, 3, 4

log = logging.getLogger("coreapprox")


def _cmd_generate(args):
    game = build_game(args.model, args.n, args.beta)
    save_game(game, args.out)
    print(f"wrote {game.label} to {args.out}")
    if not check_nonempty(game):
        print("warning: the core of this game is empty", file=sys.stderr)
    return EXIT_OK


def _cmd_approximate(args):
    game = load_game(args.game)
    scheme = DirectionScheme.parse(args.scheme, args.seed, args.eps)
    result = approximate_core(game, args.k, scheme)
    save_result(result, args.out, timing=not args.no_timing)
    if result.empty_core:
        print("core is empty: no vertices", file=sys.stderr)
        return EXIT_EMPTY
    print(f"{len(result.vertices)} distinct vertices from k={args.k} "
          f"({result.solve_time_s:.3f} s)")
    return EXIT_OK


def _cmd_exact(args):
    game = load_game(args.game)
    if not check_nonempty(game):
        print("core is empty: no vertices", file=sys.stderr)
        return EXIT_EMPTY
    method = args.method
    if method == "auto":
        method = "naive" if game.n <= MAX_NAIVE_PLAYERS else "saturation"
    if method == "naive":
        vs = enumerate_vertices_naive(game)
    else:
        vs = saturation_reference(game, args.stall, args.seed)
    _jsonio.dump(vs.to_dict(), args.out)
    note = "" if vs.complete else " (saturation, not proven complete)"
    print(f"{len(vs)} vertices{note}")
    return EXIT_OK


def _cmd_metrics(args):
    approx = load_vertex_set(args.approx)
    exact = load_vertex_set(args.exact)
    if len(exact) == 0:
        print("reference vertex set is empty", file=sys.stderr)
        return EXIT_EMPTY
    total = float(exact.points[0].sum())
    report = evaluate(approx, exact, convex_hull(approx.points, total),
                      convex_hull(exact.points, total))
    text = _jsonio.dumps({k: v for k, v in report.as_dict().items()
                          if k not in ("solve_time_s", "hull_time_s")})
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_hull(args):
    vs = load_vertex_set(args.vertices)
    if len(vs) == 0:
        print("vertex set is empty", file=sys.stderr)
        return EXIT_EMPTY
    poly = convex_hull(vs.points)
    vol = volume(poly)
    data = poly.to_dict(None if poly.degenerate else vol)
    _jsonio.dump(data, args.out)
    print(f"{len(poly.vertices)} hull vertices, affine dim {poly.affine_dim}, "
          f"volume {'DEGENERATE' if poly.degenerate else format(vol, '.10g')}")
    return EXIT_OK


def _cmd_bench(args):
    configs = load_config(args.config)
    for cfg in configs:
        if args.runs is not None:
            cfg.runs = args.runs
        if args.no_timing:
            cfg.timing = False
    rows = run_all(configs)
    out = args.out or configs[0].out_path
    text = emit_table(rows, out, args.style)
    if out is None or args.show:
        sys.stdout.write(text if args.style == "text" else emit_table(rows, None, "text"))
    return EXIT_OK


def _parse_alloc(text):
    try:
        return np.array([float(t) for t in text.replace(" ", "").split(",") if t])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse allocation {text!r}") from exc


def _cmd_check(args):
    verdict = check_allocation_files(args.game, args.alloc, args.approx)
    for line in verdict.lines():
        print(line)
    return EXIT_OK


def _cmd_shapley(args):
    phi = shapley_value(load_game(args.game))
    print(",".join(format(v, ".17g") for v in phi))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coreapprox",
        description="Approximate the core of TU-games by repeated linear programming.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a benchmark game to JSON")
    p.add_argument("--model", required=True, choices=["savings", "nonconvex", "museum"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, default=0.75)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("approximate", help="sample core vertices with k LP solves")
    p.add_argument("--game", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--scheme", choices=["det", "rand"], default="rand")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-6,
                   help="tiebreak perturbation for the det scheme")
    p.add_argument("--no-timing", action="store_true",
                   help="write null timings so repeated runs are byte-identical")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_approximate)

    p = sub.add_parser("exact", help="reference vertex set (naive or saturation)")
    p.add_argument("--game", required=True)
    p.add_argument("--method", choices=["auto", "naive", "saturation"], default="auto")
    p.add_argument("--stall", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("metrics", help="EPR, VR and RDC of an approximation")
    p.add_argument("--approx", required=True)
    p.add_argument("--exact", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("hull", help="export the convex hull of a vertex file")
    p.add_argument("--vertices", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_hull)

    p = sub.add_parser("bench", help="run a benchmark grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--style", choices=["csv", "text"], default="csv")
    p.add_argument("--runs", type=int)
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--show", action="store_true", help="also print the text table")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("check", help="test whether an allocation is in the core")
    p.add_argument("--game", required=True)
    p.add_argument("--alloc", required=True, type=_parse_alloc)
    p.add_argument("--approx")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("shapley", help="exact Shapley value")
    p.add_argument("--game", required=True)
    p.set_defaults(func=_cmd_shapley)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(f"diagnostics: {exc.diagnostics}", file=sys.stderr)
        return EXIT_SOLVER
    except (CoreApproxError, CapacityError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
