"""Command line entry point: ``capgaps <command> ...``.

Exit status is 0 on success, 2 on invalid input, 3 on I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .channel import InvalidChannelError, dump_channels, load_channels, noise_from_string
from .coding import (
    Coding,
    bare_error,
    builtin_code,
    coding_error,
    kl_check,
    pauli_string,
    single_qubit_paulis,
)
from .experiments import (
    CsvParseError,
    RunConfig,
    decompose_rows,
    evaluate_channels,
    plot_scatter,
    read_csv,
    run_scatter,
    write_csv,
)
from .optimize import OptimizerConfig
from .sampling import SampleSpec, sample_channel

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 2, 3


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, seed=args.seed)


def cmd_sample(args) -> int:
    spec = SampleSpec(rank=args.rank, count=args.count, seed=args.seed)
    channels = sample_channel(spec)
    manifest = {"tool": "capgaps", "version": __version__, "rank": spec.rank, "count": spec.count, "seed": spec.seed}
    dump_channels(channels, args.out, manifest)
    return EXIT_OK


def _batch_seed(args, manifest) -> int:
    return args.seed if args.seed_given else int(manifest.get("seed", args.seed))


def cmd_capacities(args) -> int:
    channels, manifest = load_channels(args.input)
    rows = evaluate_channels(channels, _batch_seed(args, manifest), _optimizer(args), args.threads)
    write_csv(rows, args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    channels, _ = load_channels(args.input)
    rows = read_csv(args.append)
    rows = decompose_rows(rows, channels, _optimizer(args), args.threads)
    write_csv(rows, args.append)
    return EXIT_OK


def cmd_scatter(args) -> int:
    ranks = tuple(int(r) for r in args.ranks.split(","))
    cfg = RunConfig(ranks=ranks, count=args.count, seed=args.seed, optimizer=_optimizer(args),
                    decompose=args.decompose, threads=args.threads)
    write_csv(run_scatter(cfg), args.out)
    return EXIT_OK


def cmd_figure(args) -> int:
    rows = read_csv(args.input)
    plot_scatter(rows, args.x, args.y, group_by_rank=not args.no_groups, path=args.out)
    return EXIT_OK


def cmd_code_check(args) -> int:
    code = builtin_code(args.code)
    noise = noise_from_string(args.noise)
    coding = Coding.from_code(code)
    eps = coding_error(coding, noise)
    bare = bare_error(noise, code.k)
    ok, _ = kl_check(code, [pauli_string(w) for w in single_qubit_paulis(code.n)])
    report = {
        "code": code.name,
        "noise": args.noise,
        "n": code.n,
        "k": code.k,
        "coding_error": eps,
        "bare_error": bare,
        "works": eps < bare,
        "kl_single_qubit_paulis": ok,
    }
    print(json.dumps(report, indent=1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="global seed (default 0)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes (default 1)")

    parser = argparse.ArgumentParser(prog="capgaps", parents=[common], description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"capgaps {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def opt_flags(p):
        p.add_argument("--restarts", type=int, default=16)
        p.add_argument("--max-iters", type=int, default=2000)

    p = sub.add_parser("sample", parents=[common], help="sample random qubit channels of fixed rank")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("capacities", parents=[common], help="compute capacities for a channel batch")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    opt_flags(p)
    p.set_defaults(func=cmd_capacities)

    p = sub.add_parser("decompose", parents=[common], help="add Q_III upper bounds to a results file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--append", required=True)
    opt_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("scatter", parents=[common], help="sample and evaluate in one run")
    p.add_argument("--ranks", default="2,3,4")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--out", required=True)
    p.add_argument("--decompose", action="store_true")
    opt_flags(p)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("figure", parents=[common], help="scatter plot of two result columns")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--x", default="t_norm")
    p.add_argument("--y", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-groups", action="store_true")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("code-check", parents=[common], help="coding error of a built-in code under noise")
    p.add_argument("--code", required=True)
    p.add_argument("--noise", required=True)
    p.set_defaults(func=cmd_code_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed_given = hasattr(args, "seed")
    if not args.seed_given:
        args.seed = 0
    if not hasattr(args, "threads"):
        args.threads = 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"capgaps: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, IndexError, InvalidChannelError, CsvParseError) as exc:
        print(f"capgaps: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
