"""Command-line entry point: ``lecam <subcommand> ...``.

Every failure prints one line ``error[<code>]: <reason>`` to stderr and
exits nonzero.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from lecam.config import ExperimentConfig
from lecam.divergences import DiscreteDistribution, DivergenceKind, all_divergences, inequality_chain
from lecam.errors import DomainError, IngestionError, LecamError
from lecam import experiments
from lecam.tabular import verify_lecam_identity

EXIT_ERROR = 2
EXIT_ABORTED = 3


class CliFailure(Exception):
    def __init__(self, code: str, reason: str, status: int = EXIT_ERROR):
        super().__init__(reason)
        self.code = code
        self.reason = reason
        self.status = status


def _load_config(path: str, args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.load(path)
    return cfg.with_overrides(seed=args.seed, out=args.out)


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args)
    out = experiments.execute_run(cfg)
    if out.result.aborted:
        raise CliFailure("aborted", f"{out.result.abort_reason}; partial metrics in {out.run_dir}", EXIT_ABORTED)
    last = out.final
    print(
        f"run_dir={out.run_dir} step={last['step']} proxy_fd={last['proxy_fd']:.6g} "
        f"modes_covered={last['modes_covered']:g} (proxy_fd: 2-D Frechet stand-in, not FID)"
    )
    return 0


def cmd_prop1_verify(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise CliFailure("usage", "--trials must be >= 1")
    seed = 0 if args.seed is None else args.seed
    rep = verify_lecam_identity(args.trials, seed, negative_weight=args.negative_weight)
    if args.negative_weight:
        verdict = "PASS" if rep.passed else "FAIL"
        print(f"prop1-verify negative-weight trials={rep.trials} seed={seed} all_C_negative={rep.all_negative} {verdict}")
    else:
        print(
            f"prop1-verify trials={rep.trials} seed={seed} "
            f"max_identity_error={rep.max_identity_error:.3e} (tol {rep.identity_tol:g}) "
            f"max_stationarity_residual={rep.max_stationarity_residual:.3e} (tol {rep.stationarity_tol:g}) "
            f"{'PASS' if rep.passed else 'FAIL'}"
        )
    return 0 if rep.passed else 1


def cmd_curves(args: argparse.Namespace) -> int:
    target = args.path or args.out
    text = experiments.curves_csv()
    if target in (None, "-"):
        sys.stdout.write(text)
        return 0
    try:
        Path(target).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliFailure("io", f"cannot write {target}: {exc.strerror}") from None
    print(f"wrote {target}")
    return 0


def read_weights(path: str) -> list[float]:
    """All numeric cells of a CSV in row-major order; a leading header row is skipped."""
    values: list[float] = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                cells = [c.strip() for c in row if c.strip()]
                if not cells:
                    continue
                try:
                    values.extend(float(c) for c in cells)
                except ValueError:
                    if lineno == 1 and not values:
                        continue
                    raise IngestionError(f"{path}: line {lineno}: non-numeric weight") from None
    except OSError as exc:
        raise IngestionError(f"{path}: {exc.strerror}") from exc
    return values


def _distribution(path: str) -> DiscreteDistribution:
    try:
        return DiscreteDistribution.normalized(read_weights(path))
    except DomainError as exc:
        raise CliFailure("normalize", f"{path}: {exc}") from None


def cmd_divergence(args: argparse.Namespace) -> int:
    p = _distribution(args.p_csv)
    q = _distribution(args.q_csv)
    if len(p) != len(q):
        raise CliFailure("dimension", f"{args.p_csv} has {len(p)} weights, {args.q_csv} has {len(q)}")
    vals = all_divergences(p, q)
    for kind in DivergenceKind:
        print(f"{kind.value}={vals[kind.value]:.12g}")
    chain = inequality_chain(p, q)
    labels = ("lecam/4", "js", "lecam/2", "tv/2")
    print("chain " + " <= ".join(f"{k}={v:.12g}" for k, v in zip(labels, chain)))
    return 0


def _summary(args: argparse.Namespace, text: str) -> int:
    sys.stdout.write(text)
    if args.table:
        Path(args.table).write_text(text, encoding="utf-8")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args)
    lambdas = [float(x) for x in args.lambdas.split(",")]
    return _summary(args, experiments.lambda_sweep(cfg, lambdas))


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args)
    if args.kind == "anchors":
        return _summary(args, experiments.anchor_ablation(cfg))
    return _summary(args, experiments.side_ablation(cfg))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the seed")
    common.add_argument("--out", default=None, help="output directory (train, sweep, ablate) or file (curves)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lecam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train a toy GAN from a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("prop1-verify", parents=[common], help="check the LeCam identity on random tabular games")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--negative-weight", action="store_true", help="sample lambda above 1/(2 alpha)")
    p.set_defaults(func=cmd_prop1_verify)

    p = sub.add_parser("curves", parents=[common], help="write the f(t) comparison table as CSV")
    p.add_argument("path", nargs="?", default=None)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("divergence", parents=[common], help="all divergences between two weight CSVs")
    p.add_argument("p_csv")
    p.add_argument("q_csv")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("sweep", parents=[common], help="one run per lambda value")
    p.add_argument("config")
    p.add_argument("--lambdas", default="0,0.1,0.3,0.5,1.0")
    p.add_argument("--table", default=None, help="also write the summary CSV here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablate", parents=[common], help="anchor or regularized-side ablation")
    p.add_argument("config")
    p.add_argument("--kind", choices=("anchors", "sides"), default="anchors")
    p.add_argument("--table", default=None, help="also write the summary CSV here")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliFailure as exc:
        print(f"error[{exc.code}]: {exc.reason}", file=sys.stderr)
        return exc.status
    except LecamError as exc:
        reason = str(exc).replace("\n", " ")
        print(f"error[{exc.code}]: {reason}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error[usage]: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
