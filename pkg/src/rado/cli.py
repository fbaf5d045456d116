"""``rado`` command line.

Exit codes: 0 success, 2 bad input, 3 resource cap hit, 4 certificate failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import bounds, constructions
from .errors import CertificateError, InputError, ResourceLimitError
from .experiments import ExperimentSpec, rows_to_csv, run_experiment
from .geometry import load_collection, save_collection
from .oracle import DEFAULT_CAP, max_disjoint_volume
from .selectors import ALGORITHMS, run_selector

EXIT_INPUT, EXIT_RESOURCE, EXIT_CERTIFICATE = 2, 3, 4


def _emit_json(data, target: str) -> None:
    text = json.dumps(data, indent=2)
    if target == "-":
        print(text)
    else:
        with open(target, "w") as fh:
            fh.write(text + "\n")


def _emit_text(target: str | None, text: str) -> None:
    if target in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()] if text else []


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()] if text else []


# -- subcommands -----------------------------------------------------------------------

def cmd_select(args) -> int:
    c = load_collection(args.collection)
    res = run_selector(args.algo, c, args.eps)
    if args.json:
        _emit_json(res.to_dict(), args.json)
    else:
        print(f"{res.algorithm}: chose {len(res.chosen)} of {len(c)} bodies {list(res.chosen)}")
        print(f"density {res.density:.6f}  guarantee {res.guarantee:.6f}  union {res.union_volume.value:.6f}"
              f" ({res.union_volume.method})")
    return 0


def cmd_oracle(args) -> int:
    c = load_collection(args.collection)
    res = max_disjoint_volume(c, forbidden=_int_list(args.forbid), cap=args.cap)
    if args.json:
        _emit_json(res.to_dict(), args.json)
    else:
        print(f"best disjoint volume {res.selected_volume:.6f} with {list(res.chosen)}")
        print(f"delta {res.delta:.6f}  nodes {res.nodes_explored}")
    return 0


def cmd_bounds(args) -> int:
    rows = bounds.bounds_table(args.dmax)
    if args.json:
        _emit_json([r.to_dict() for r in rows], args.json)
    elif args.csv:
        lines = ["name,d,value,side,body,note"]
        lines += [f"{r.name},{r.d},{r.value!r},{r.side},{r.body},\"{r.note}\"" for r in rows]
        _emit_text(args.csv, "\n".join(lines) + "\n")
    else:
        for r in rows:
            print(f"{r.name:16s} d={r.d:<3d} {r.value:.6e}  {r.side:11s} {r.body}")
    return 0


def cmd_kl(args) -> int:
    res = bounds.kl_upper_optimize(tol=args.tol)
    if args.json:
        _emit_json(res.to_dict(), args.json)
    else:
        print(f"theta* = {res.theta_star:.6f}")
        print(f"min objective = {res.objective_min:.6f}")
        print(f"r* = {res.r_star:.6f}")
        print(f"f(B^d) <= {res.base:.5f}^-d asymptotically")
    return 0


def cmd_construct(args) -> int:
    name = args.family
    if name == "four-squares":
        c = constructions.four_squares()
    elif name == "translate-net":
        c = constructions.translate_net(args.kind, args.d, args.n, args.seed)
    elif name == "pinwheel":
        c = constructions.pinwheel(args.n)
    elif name == "ball-net":
        c = constructions.ball_net(args.d, args.R, args.n, args.seed)
    elif name == "ajtai":
        c = constructions.ajtai_almost_counterexample()
    else:
        c = constructions.compose_ajtai(constructions.ajtai_almost_counterexample())
    if args.output:
        save_collection(c, args.output)
        print(f"wrote {len(c)} bodies to {args.output}")
    else:
        print(json.dumps(c.to_dict(), indent=1))
    return 0


def cmd_verify_ajtai(args) -> int:
    c = load_collection(args.collection)
    rect = None
    if args.rect:
        rect = _float_list(args.rect)
        if len(rect) != 4:
            raise InputError("--rect takes x0,y0,x1,y1")
    rep = constructions.verify_almost_counterexample(c, rect)
    if args.json:
        _emit_json(rep.to_dict(), args.json)
    else:
        quarter = rep.total_area / 4
        print(f"total area {rep.total_area:g}, quarter {quarter:g}")
        print(f"property 1 {'holds' if rep.property1_holds else 'fails'}: "
              f"best disjoint {rep.best_unconstrained.selected_volume:g}")
        print(f"property 2 {'holds' if rep.property2_holds else 'fails'}: "
              f"best avoiding {len(rep.bottom_row_indices)} floor squares {rep.best_constrained.selected_volume:g}")
    return 0


def cmd_bench(args) -> int:
    spec = ExperimentSpec(
        dimension=args.d, kind=args.kind, n_bodies=args.n, radius_model=args.model,
        radius_params=tuple(_float_list(args.params)), center_box=args.center_box,
        trials=args.trials, seed=args.seed, algorithms=tuple(args.algos.split(",")),
        oracle_max_n=args.oracle_max_n, eps=args.eps,
    )
    summary = run_experiment(spec)
    if args.json:
        _emit_json(summary.per_algorithm, args.json)
    _emit_text(args.csv, rows_to_csv(summary.rows))
    for name, s in summary.per_algorithm.items():
        ratio = s["worst_ratio_to_oracle"]
        ratio_text = "n/a" if math.isnan(ratio) else f"{ratio:.4f}"
        print(f"{name}: min {s['min_density']:.4f} mean {s['mean_density']:.4f} "
              f"worst/oracle {ratio_text} errors {s['errors']}", file=sys.stderr)
    return 0


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # the subcommand copies must not reset values given before the subcommand
        g = argparse.ArgumentParser(add_help=False)
        hidden = argparse.SUPPRESS
        g.add_argument("--seed", type=int, default=hidden if suppress else 0, help="RNG seed (default 0)")
        g.add_argument("--json", nargs="?", const="-", default=hidden if suppress else None, metavar="PATH",
                       help="emit JSON, to PATH or stdout")
        g.add_argument("--csv", nargs="?", const="-", default=hidden if suppress else None, metavar="PATH",
                       help="emit CSV, to PATH or stdout")
        return g

    common = global_flags(suppress=True)

    parser = argparse.ArgumentParser(prog="rado", description="Disjoint subcollection workbench.",
                                     parents=[global_flags(suppress=False)])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", parents=[common], help="run a selection algorithm")
    p.add_argument("collection")
    p.add_argument("--algo", choices=list(ALGORITHMS), default="greedy")
    p.add_argument("--eps", type=float, default=0.01)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("oracle", parents=[common], help="exact best disjoint subcollection")
    p.add_argument("collection")
    p.add_argument("--forbid", default="", help="comma-separated indices to exclude")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bounds", parents=[common], help="table of density bounds")
    p.add_argument("--dmax", type=int, default=10)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("kl", parents=[common], help="minimise the ball upper-bound exponent")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("construct", parents=[common], help="write an extremal family")
    p.add_argument("family", choices=["four-squares", "translate-net", "pinwheel", "ball-net",
                                      "ajtai", "ajtai-composed"])
    p.add_argument("--kind", default="box", choices=["box", "ball"])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--R", type=float, default=2 ** 0.5)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify-ajtai", parents=[common], help="check the almost-counterexample properties")
    p.add_argument("collection")
    p.add_argument("--rect", help="x0,y0,x1,y1 (default: read R= from the label)")
    p.set_defaults(func=cmd_verify_ajtai)

    p = sub.add_parser("bench", parents=[common], help="selectors against the oracle on random ensembles")
    p.add_argument("--algos", default="greedy")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--kind", default="box", choices=["box", "ball"])
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--model", default="equal", choices=["equal", "uniform", "two_scale", "lacunary"])
    p.add_argument("--params", default="", help="radius model parameters, comma-separated")
    p.add_argument("--center-box", type=float, default=3.0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--oracle-max-n", type=int, default=14)
    p.add_argument("--eps", type=float, default=0.01)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"rado: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except CertificateError as exc:
        print(f"rado: certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (InputError, OSError, ValueError) as exc:
        print(f"rado: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
