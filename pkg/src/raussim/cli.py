"""Command line front end.

Subcommands: ``generate`` (sample a faulty lattice and dump it),
``renormalize`` (purify a dumped lattice), ``verify`` (replay a plan
through the measurement rules and compare against the purified dump) and
``sweep`` (Monte Carlo sweeps over box size or input error rate).

Exit codes: 0 success, 2 configuration error, 3 dump parse error,
4 verification mismatch, 1 other I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import io as rio
from .analysis import sweep_box_size, sweep_input_error
from .driver import renormalize_parallel
from .errors import ConfigError, ParseError, RaussimError
from .graphstate import reduce_by_plan
from .lattice import GenModel, ModelKind, generate_faulty
from .renormalize import BondStatus, output_error_rate

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_MISMATCH = 4

OUT_DIR_ENV = "RAUSSIM_OUT_DIR"


def _out_path(name_or_flag: str | None, default_name: str) -> Path:
    if name_or_flag is not None:
        return Path(name_or_flag)
    return Path(os.environ.get(OUT_DIR_ENV, ".")) / default_name


def _model_from_args(args) -> GenModel:
    kind = ModelKind.SKIP_BOND if args.model == "skip" else ModelKind.INDEPENDENT_BOND
    return GenModel(kind=kind, p_fail=args.p_fail, q_skip=args.q_skip, seed=args.seed)


def cmd_generate(args) -> int:
    model = _model_from_args(args)
    if args.dims is not None and args.coarse_dims is not None:
        raise ConfigError("give either --dims or --coarse-dims, not both")
    if args.dims is not None:
        dims = tuple(args.dims)
    elif args.coarse_dims is not None:
        dims = tuple(c * args.box_size for c in args.coarse_dims)
    else:
        raise ConfigError("one of --dims or --coarse-dims is required")
    instance = generate_faulty(dims, model, box_size=args.box_size)
    out = _out_path(args.output, "lattice.txt")
    out.write_text(rio.dump_lattice(instance))
    print(f"wrote {out}")
    print(f"nodes {instance.num_nodes} realized {instance.realized_bonds} "
          f"failed {instance.failed_bonds} nonlocal {instance.nonlocal_bonds}")
    return EXIT_OK


def cmd_renormalize(args) -> int:
    instance = rio.parse_lattice(Path(args.input).read_text())
    box_size = args.box_size if args.box_size is not None else instance.box_size
    instance = instance.with_box_size(box_size)
    purified, plan, report = renormalize_parallel(instance, box_size, workers=args.workers)
    out_p = _out_path(args.output, "purified.txt")
    out_m = _out_path(args.plan, "plan.txt")
    out_p.write_text(rio.dump_purified(purified))
    out_m.write_text(rio.dump_plan(instance, plan))
    print(f"wrote {out_p} and {out_m}")
    print(f"boxes {len(purified.grid.carrying_positions())} "
          f"structures {len(purified.structures)} "
          f"realized {purified.realized_count} failed {purified.failed_count} "
          f"output_error_rate {output_error_rate(purified):.6f}")
    if args.workers > 1:
        for s in report.stats:
            print(f"worker {s.worker}: layers {s.layers[0]}..{s.layers[1]} "
                  f"boxes {s.boxes} bonds {s.bonds_owned} "
                  f"sent {s.bytes_sent}B received {s.bytes_received}B")
    return EXIT_OK


def cmd_verify(args) -> int:
    instance = rio.parse_lattice(Path(args.input).read_text())
    plan = rio.parse_plan(Path(args.plan).read_text(), instance)
    pnodes, pbonds = rio.parse_purified(Path(args.purified).read_text())

    reduced = reduce_by_plan(instance.graph, plan)
    got_nodes = {nid.box for nid in reduced.nodes}
    got_edges = {tuple(sorted((a.box, b.box))) for a, b in reduced.edges()}
    want_edges = {tuple(sorted((c1, c2))) for c1, c2, status, _ in pbonds
                  if status is BondStatus.REALIZED}

    ok = True
    for c in sorted(pnodes - got_nodes):
        print(f"missing node {c[0]},{c[1]},{c[2]}")
        ok = False
    for c in sorted(got_nodes - pnodes):
        print(f"extra node {c[0]},{c[1]},{c[2]}")
        ok = False
    for c1, c2 in sorted(want_edges - got_edges):
        print(f"missing bond {c1[0]},{c1[1]},{c1[2]} {c2[0]},{c2[1]},{c2[2]}")
        ok = False
    for c1, c2 in sorted(got_edges - want_edges):
        print(f"extra bond {c1[0]},{c1[1]},{c1[2]} {c2[0]},{c2[1]},{c2[2]}")
        ok = False
    if not ok:
        print("verification FAILED")
        return EXIT_MISMATCH
    print(f"verification passed: {len(got_nodes)} nodes, {len(want_edges)} bonds")
    return EXIT_OK


def cmd_sweep(args) -> int:
    seeds = list(range(args.seed_base, args.seed_base + args.seeds))
    kind = ModelKind.SKIP_BOND if args.model == "skip" else ModelKind.INDEPENDENT_BOND
    if args.kind == "box":
        if not args.box_sizes:
            raise ConfigError("box sweep needs --box-sizes")
        report = sweep_box_size(args.p_fail, args.box_sizes, seeds,
                                coarse_dims=tuple(args.coarse_dims), model_kind=kind,
                                q_skip=args.q_skip, jobs=args.jobs)
    else:
        if not args.p_fails:
            raise ConfigError("input sweep needs --p-fails")
        if args.box_size is None:
            raise ConfigError("input sweep needs --box-size")
        report = sweep_input_error(args.p_fails, args.box_size, seeds,
                                   coarse_dims=tuple(args.coarse_dims), model_kind=kind,
                                   q_skip=args.q_skip, jobs=args.jobs)
    suffix = "csv" if args.format == "csv" else "json"
    out = _out_path(args.output, f"sweep_{args.kind}.{suffix}")
    if args.format == "csv":
        out.write_text(report.to_csv())
    else:
        out.write_text(json.dumps(report.to_json(), indent=2) + "\n")
    print(f"wrote {out}")
    for r in report.records:
        se = "" if r.stderr_out is None else f" +- {r.stderr_out:.4f}"
        print(f"p_fail {r.p_fail} B {r.box_size}: mean_out {r.mean_out:.4f}{se}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="raussim",
                                  description="faulty cluster lattices and box purification")
    sub = top.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a faulty lattice and dump it")
    g.add_argument("--dims", type=int, nargs=3, default=None, metavar=("DX", "DY", "DZ"))
    g.add_argument("--coarse-dims", type=int, nargs=3, default=None, metavar=("CX", "CY", "CZ"),
                   help="box counts per axis; fine dims = coarse dims * box size")
    g.add_argument("--box-size", type=int, default=1)
    g.add_argument("--model", choices=("independent", "skip"), default="independent")
    g.add_argument("--p-fail", type=float, default=0.25)
    g.add_argument("--q-skip", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", default=None)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("renormalize", help="purify a dumped lattice")
    r.add_argument("-i", "--input", required=True)
    r.add_argument("--box-size", type=int, default=None,
                   help="defaults to the dump header's box size")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("-o", "--output", default=None, help="purified dump path")
    r.add_argument("--plan", default=None, help="plan dump path")
    r.set_defaults(func=cmd_renormalize)

    v = sub.add_parser("verify", help="replay a plan against a purified dump")
    v.add_argument("-i", "--input", required=True, help="lattice dump")
    v.add_argument("--plan", required=True)
    v.add_argument("--purified", required=True)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="Monte Carlo sweeps")
    s.add_argument("kind", choices=("box", "input"))
    s.add_argument("--p-fail", type=float, default=0.25)
    s.add_argument("--p-fails", type=float, nargs="+", default=None)
    s.add_argument("--box-size", type=int, default=None)
    s.add_argument("--box-sizes", type=int, nargs="+", default=None)
    s.add_argument("--coarse-dims", type=int, nargs=3, default=(5, 5, 3),
                   metavar=("CX", "CY", "CZ"))
    s.add_argument("--model", choices=("independent", "skip"), default="independent")
    s.add_argument("--q-skip", type=float, default=0.1)
    s.add_argument("--seeds", type=int, default=5, help="number of seeds")
    s.add_argument("--seed-base", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_sweep)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RaussimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
