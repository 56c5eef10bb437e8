"""Run persistence and the small experiment drivers behind the CLI."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from lecam.config import ExperimentConfig
from lecam.divergences import DivergenceKind, f_curve
from lecam.nn import save_checkpoint
from lecam.trainer import TrainResult, final_quarter_prediction_scale, train

log = logging.getLogger(__name__)

CURVE_COLUMNS = ("t", "lecam", "lecam_weighted_quarter", "js", "chi2", "tv", "kl")
# LeCam weight 1/(2 lam) - alpha used for the weighted curve
CURVE_WEIGHT = 0.25


@dataclass
class RunOutcome:
    run_dir: Path
    result: TrainResult

    @property
    def final(self) -> dict:
        return self.result.record.rows[-1]

    @property
    def prediction_scale(self) -> float:
        return final_quarter_prediction_scale(self.result.record)


def execute_run(cfg: ExperimentConfig) -> RunOutcome:
    """Train from ``cfg`` and write the run directory.

    The directory holds ``config.snapshot``, ``metrics.csv`` and the G/D
    checkpoints; an aborted run keeps its partial metrics.
    """
    run_dir = Path(cfg.output.dir) / cfg.run_dir_name()
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.snapshot").write_text(cfg.to_text(), encoding="utf-8")
    data, reference = cfg.build_data()
    result = train(cfg.train_config(), data, reference)
    result.record.write_csv(run_dir / "metrics.csv")
    save_checkpoint(result.g, run_dir / "generator.ckpt")
    save_checkpoint(result.d, run_dir / "discriminator.ckpt")
    return RunOutcome(run_dir, result)


def _table_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(v if isinstance(v, str) else repr(float(v)) for v in r))
    return "\n".join(lines) + "\n"


SUMMARY_COLUMNS = ("variant", "final_proxy_fd", "final_modes_covered", "final_quarter_pred_scale", "run_dir")


def _summary_row(name: str, out: RunOutcome) -> tuple:
    return (name, out.final["proxy_fd"], out.final["modes_covered"], out.prediction_scale, str(out.run_dir))


def lambda_sweep(base: ExperimentConfig, lambdas: Sequence[float] = (0.0, 0.1, 0.3, 0.5, 1.0)) -> str:
    """One run per regularization weight; returns a summary CSV."""
    rows = []
    for lam in lambdas:
        out = execute_run(base.with_overrides(lam=float(lam)))
        rows.append(_summary_row(f"lambda={lam:g}", out))
    return _table_csv(SUMMARY_COLUMNS, rows)


def anchor_ablation(base: ExperimentConfig, constants: Sequence[float] = (0.5, 1.0)) -> str:
    """Moving-average anchors against fixed anchors ``(c, -c)``."""
    rows = [_summary_row("ema", execute_run(base.with_overrides(constant_anchor=None)))]
    for c in constants:
        out = execute_run(base.with_overrides(constant_anchor=float(c)))
        rows.append(_summary_row(f"constant=+-{c:g}", out))
    return _table_csv(SUMMARY_COLUMNS, rows)


def side_ablation(base: ExperimentConfig) -> str:
    """Regularize neither, only real, only generated, or both prediction sets."""
    rows = []
    variants = [("none", False, False), ("real", True, False), ("generated", False, True), ("both", True, True)]
    for name, rr, rf in variants:
        kw = dict(reg_real=rr, reg_fake=rf)
        if not (rr or rf):
            kw["lam"] = 0.0
        rows.append(_summary_row(name, execute_run(base.with_overrides(**kw))))
    return _table_csv(SUMMARY_COLUMNS, rows)


def curve_grid() -> np.ndarray:
    """201 log-spaced points over [1e-3, 1e3] with t = 1 exactly on the grid."""
    return 10.0 ** (np.arange(-100, 101) * 3 / 100)


def curves_table(ts: Optional[np.ndarray] = None) -> list[tuple[float, ...]]:
    ts = curve_grid() if ts is None else ts
    rows = []
    for t in ts.tolist():
        lc = f_curve(DivergenceKind.LECAM, t)
        rows.append(
            (
                t,
                lc,
                CURVE_WEIGHT * lc,
                f_curve(DivergenceKind.JS, t),
                f_curve(DivergenceKind.CHI_SQUARED, t),
                f_curve(DivergenceKind.TOTAL_VARIATION, t),
                f_curve(DivergenceKind.KL, t),
            )
        )
    return rows


def curves_csv() -> str:
    return _table_csv(CURVE_COLUMNS, curves_table())

