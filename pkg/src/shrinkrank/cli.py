"""Command-line entry point: ``shrinkrank sample|benchmark|diagnose``."""
import argparse
import logging
import sys

from .bench import (
    RESULT_COLUMNS, TARGET_IDS, build_target, load_plan, output_path,
    report_for, run_benchmark,
)
from .chain_io import read_chain_csv, write_chain_csv, write_rows_csv
from .diagnostics import EfficiencyReport, InestimableError
from .rng import RandomSource
from .samplers import SAMPLERS, SamplerError, make_sampler


def _parse_monitored(value):
    if value in ("worst", "log-density"):
        return value
    try:
        idx = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"monitored must be 'worst', 'log-density' or a coordinate index, not {value!r}"
        ) from None
    if idx < 0:
        raise argparse.ArgumentTypeError("coordinate index must be non-negative")
    return str(idx)


def build_parser():
    parser = argparse.ArgumentParser(prog="shrinkrank", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run one chain and write it as CSV")
    p.add_argument("--target", required=True, help=f"one of {', '.join(TARGET_IDS)}")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--data", default=None, help="regression CSV or eight-schools TOML")
    p.add_argument("--sampler", default="shrink-rank", choices=sorted(SAMPLERS))
    p.add_argument("--tuning", "--sigma-c", dest="tuning", type=float, default=1.0,
                   help="sigma_c for shrink-rank, initial sd * sqrt(d) for adaptive-metropolis")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="chain CSV path (default chain.csv)")

    p = sub.add_parser("benchmark", help="run a tuning-grid benchmark plan")
    p.add_argument("plan")
    p.add_argument("--out", default=None, help="results CSV (overrides the plan's output)")
    p.add_argument("--n-jobs", type=int, default=None)

    p = sub.add_parser("diagnose", help="efficiency report for a chain CSV")
    p.add_argument("chain")
    p.add_argument("--monitored", type=_parse_monitored, default="worst")
    p.add_argument("--burn-in", type=float, default=0.1)
    p.add_argument("--out", default=None, help="write the report row here instead of stdout")
    return parser


def cmd_sample(args):
    target = build_target(args.target, dim=args.dim, rho=args.rho, data=args.data)
    params = {} if args.theta is None or args.sampler != "shrink-rank" else {"theta": args.theta}
    sampler = make_sampler(args.sampler, args.tuning, **params)
    chain = sampler.sample(target, None, args.n, RandomSource(args.seed))
    path = output_path(args.out, "chain.csv")
    write_chain_csv(chain, path)
    grads = int(chain.cum_grad_evals[-1]) if len(chain) else 0
    print(f"wrote {len(chain)} states to {path}")
    print(f"density evaluations: {chain.total_density_evals}  gradient evaluations: {grads}")
    return 0


def cmd_benchmark(args):
    plan = load_plan(args.plan)
    rows = run_benchmark(plan, n_jobs=args.n_jobs)
    path = output_path(args.out or plan.output, "results.csv")
    write_rows_csv(rows, RESULT_COLUMNS, path)
    bad = sum(r["status"] != "ok" for r in rows)
    print(f"wrote {len(rows)} rows to {path} ({bad} not ok)")
    return 0


def cmd_diagnose(args):
    chain = read_chain_csv(args.chain)
    rep = report_for(chain, args.monitored, args.burn_in)
    columns = EfficiencyReport.FIELDS
    if args.out:
        write_rows_csv([rep.as_row()], columns, output_path(args.out, "report.csv"))
    else:
        write_rows_csv([rep.as_row()], columns, sys.stdout)
    return 0


COMMANDS = {"sample": cmd_sample, "benchmark": cmd_benchmark, "diagnose": cmd_diagnose}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError, SamplerError, InestimableError) as exc:
        print(f"shrinkrank {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
