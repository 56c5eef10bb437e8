"""Alternating D/G training with the LeCam-regularized discriminator loss.

One run is single-threaded and fully determined by its config: parameter
init, batch indices, latent noise and evaluation noise each come from their
own child of ``SeedSequence(seed)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from lecam.anchors import DEFAULT_GAMMA, AnchorState, anneal_gamma, ema_update
from lecam.data import Dataset2D
from lecam.errors import DomainError, TrainingAborted
from lecam.losses import (
    BatchPredictions,
    LossFamily,
    LossSpec,
    discriminator_loss_and_grads,
    generator_loss_and_grads,
    single_anchor_violation,
)
from lecam.metrics import gp0_diagnostic, mode_coverage, proxy_frechet
from lecam.nn import Adam, MlpNet

log = logging.getLogger(__name__)

RECORD_COLUMNS = (
    "step",
    "loss_d",
    "loss_g",
    "r_lc",
    "alpha_r",
    "alpha_f",
    "mean_d_real",
    "mean_d_fake",
    "proxy_fd",
    "modes_covered",
    "gp0_diag",
)

# anchors are refreshed after every discriminator step, not once per G step
ANCHOR_UPDATE = "every_d_step"


@dataclass(frozen=True)
class TrainConfig:
    loss: LossSpec = field(default_factory=LossSpec)
    d_steps_per_g: int = 2
    batch: int = 64
    total_g_steps: int = 20000
    lr_g: float = 2e-4
    lr_d: float = 2e-4
    gamma: float = DEFAULT_GAMMA
    eval_every: int = 500
    seed: int = 0
    g_hidden: tuple[int, ...] = (64, 64)
    d_hidden: tuple[int, ...] = (64, 64)
    z_dim: int = 2
    eval_samples: int = 2000
    # fixed anchors (c, -c) replace the moving averages when set
    constant_anchor: Optional[float] = None
    # optional gamma annealing; off unless gamma_anneal_rate > 0
    gamma_anneal_target: float = 0.999
    gamma_anneal_rate: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "g_hidden", tuple(int(h) for h in self.g_hidden))
        object.__setattr__(self, "d_hidden", tuple(int(h) for h in self.d_hidden))
        checks = {
            "d_steps_per_g": self.d_steps_per_g >= 1,
            "batch": self.batch >= 1,
            "total_g_steps": self.total_g_steps >= 0,
            "lr_g": self.lr_g > 0,
            "lr_d": self.lr_d > 0,
            "gamma": 0.0 <= self.gamma < 1.0,
            "eval_every": self.eval_every >= 1,
            "z_dim": self.z_dim >= 1,
            "eval_samples": self.eval_samples >= 2,
            "g_hidden": all(h >= 1 for h in self.g_hidden),
            "d_hidden": all(h >= 1 for h in self.d_hidden),
            "gamma_anneal_rate": 0.0 <= self.gamma_anneal_rate <= 1.0,
        }
        bad = [k for k, ok in checks.items() if not ok]
        if bad:
            raise DomainError(f"invalid training config value(s): {', '.join(bad)}")


@dataclass
class RunRecord:
    rows: list[dict] = field(default_factory=list)

    def append(self, row: dict) -> None:
        if self.rows and row["step"] <= self.rows[-1]["step"]:
            raise ValueError("record steps must strictly increase")
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv(self) -> str:
        out = [",".join(RECORD_COLUMNS)]
        for r in self.rows:
            cells = []
            for c in RECORD_COLUMNS:
                v = r[c]
                cells.append(str(int(v)) if c in ("step", "modes_covered") and v == v else repr(float(v)))
            out.append(",".join(cells))
        return "\n".join(out) + "\n"

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


@dataclass
class Nets:
    g: MlpNet
    d: MlpNet
    opt_g: Adam
    opt_d: Adam


@dataclass
class StepInfo:
    loss: float
    r_lc: float = 0.0
    mean_real: float = math.nan
    mean_fake: float = math.nan
    applied: bool = True


@dataclass
class TrainResult:
    g: MlpNet
    d: MlpNet
    record: RunRecord
    anchors: AnchorState
    aborted: bool = False
    abort_reason: str = ""
    skipped_steps: int = 0
    constraint_warnings: int = 0


def build_nets(config: TrainConfig, rng: np.random.Generator) -> Nets:
    g = MlpNet([config.z_dim, *config.g_hidden, 2], "relu", rng=rng)
    d = MlpNet([2, *config.d_hidden, 1], "lrelu", rng=rng)
    return Nets(g, d, Adam(g.params(), lr=config.lr_g), Adam(d.params(), lr=config.lr_d))


def d_step(
    nets: Nets,
    real: np.ndarray,
    z: np.ndarray,
    anchors: AnchorState,
    spec: LossSpec,
    update_anchors: bool = True,
) -> tuple[AnchorState, StepInfo]:
    """One Adam step on ``L_D``, then an anchor update from this batch's
    pre-step predictions."""
    fake = nets.g(z)
    n_real = real.shape[0]
    out, tape = nets.d.forward(np.concatenate([real, fake], axis=0))
    out = out[:, 0]
    if not np.all(np.isfinite(out)):
        return anchors, StepInfo(math.nan, applied=False)
    preds = BatchPredictions(out[:n_real], out[n_real:])
    loss, gr, gf, reg = discriminator_loss_and_grads(spec, preds, anchors)
    info = StepInfo(float(loss), reg, float(preds.d_real.mean()), float(preds.d_fake.mean()))
    if not math.isfinite(info.loss):
        info.applied = False
        return anchors, info
    grads, _ = nets.d.backward(tape, np.concatenate([gr, gf])[:, None])
    info.applied = nets.opt_d.step(nets.d.params(), grads)
    nets.d.mark_updated()
    if update_anchors:
        anchors = ema_update(anchors, info.mean_real, info.mean_fake)
    return anchors, info


def g_step(nets: Nets, z: np.ndarray, spec: LossSpec, real: Optional[np.ndarray] = None) -> StepInfo:
    """One Adam step on the unregularized generator loss; anchors untouched."""
    fake, tape_g = nets.g.forward(z)
    d_out, tape_d = nets.d.forward(fake)
    df = d_out[:, 0]
    dr = None
    if spec.family is LossFamily.RA_HINGE:
        dr = nets.d(real)[:, 0]
    if not (np.all(np.isfinite(df)) and (dr is None or np.all(np.isfinite(dr)))):
        return StepInfo(math.nan, applied=False)
    loss, gf = generator_loss_and_grads(spec.family, df, dr)
    info = StepInfo(float(loss), mean_fake=float(df.mean()))
    if not math.isfinite(info.loss):
        info.applied = False
        return info
    _, dx = nets.d.backward(tape_d, gf[:, None])
    grads, _ = nets.g.backward(tape_g, dx)
    info.applied = nets.opt_g.step(nets.g.params(), grads)
    nets.g.mark_updated()
    return info


class _Evaluator:
    def __init__(self, config: TrainConfig, train: Dataset2D, reference: Dataset2D, rng: np.random.Generator):
        self.spec = config.loss
        self.z = rng.standard_normal((config.eval_samples, config.z_dim))
        self.real = train.points
        self.reference = reference.points
        self.centers = reference.mode_centers if reference.mode_centers is not None else train.mode_centers
        self.std = reference.mode_std if reference.mode_std is not None else train.mode_std

    def row(self, step: int, nets: Nets, anchors: AnchorState) -> dict:
        fake = nets.g(self.z)
        dr = nets.d(self.real)[:, 0]
        df = nets.d(fake)[:, 0]
        preds = BatchPredictions(dr, df)
        loss_d, _, _, reg = discriminator_loss_and_grads(self.spec, preds, anchors)
        loss_g, _ = generator_loss_and_grads(self.spec.family, df, dr)
        modes = math.nan
        if self.centers is not None and self.std is not None:
            modes = mode_coverage(fake, self.centers, self.std)[0]
        return {
            "step": step,
            "loss_d": float(loss_d),
            "loss_g": float(loss_g),
            "r_lc": float(reg),
            "alpha_r": anchors.alpha_r,
            "alpha_f": anchors.alpha_f,
            "mean_d_real": float(dr.mean()),
            "mean_d_fake": float(df.mean()),
            "proxy_fd": proxy_frechet(self.reference, fake),
            "modes_covered": modes,
            "gp0_diag": gp0_diagnostic(nets.d, self.real),
        }


def _nan_row(step: int, anchors: AnchorState, loss_d: float = math.nan, loss_g: float = math.nan) -> dict:
    row = {c: math.nan for c in RECORD_COLUMNS}
    row.update(step=step, loss_d=loss_d, loss_g=loss_g, alpha_r=anchors.alpha_r, alpha_f=anchors.alpha_f)
    return row


def train(config: TrainConfig, data: Dataset2D, reference: Optional[Dataset2D] = None) -> TrainResult:
    """Run ``total_g_steps`` generator updates, each preceded by
    ``d_steps_per_g`` discriminator updates.

    ``reference`` is the set that fake samples are scored against (for
    limited-data runs, the full dataset); it defaults to ``data``.
    """
    reference = data if reference is None else reference
    spec = config.loss
    ss = np.random.SeedSequence(config.seed)
    init_ss, batch_ss, noise_ss, eval_ss = ss.spawn(4)
    nets = build_nets(config, np.random.default_rng(init_ss))
    batch_rng = np.random.default_rng(batch_ss)
    noise_rng = np.random.default_rng(noise_ss)
    evaluator = _Evaluator(config, data, reference, np.random.default_rng(eval_ss))

    if config.constant_anchor is None:
        anchors = AnchorState(gamma=config.gamma)
    else:
        c = float(config.constant_anchor)
        anchors = AnchorState(alpha_r=c, alpha_f=-c, gamma=config.gamma)
    update_anchors = config.constant_anchor is None
    if spec.lam > 0 and not spec.single_anchor:
        log.debug("dual-anchor mode: the lambda < 1/(2 alpha) bound is not checked")

    result = TrainResult(nets.g, nets.d, RunRecord(), anchors)
    result.record.append(evaluator.row(0, nets, anchors))
    pts = data.points
    n = pts.shape[0]

    for step in range(1, config.total_g_steps + 1):
        for _ in range(config.d_steps_per_g):
            real = pts[batch_rng.integers(0, n, size=config.batch)]
            z = noise_rng.standard_normal((config.batch, config.z_dim))
            anchors, info = d_step(nets, real, z, anchors, spec, update_anchors)
            if not math.isfinite(info.loss):
                return _abort(result, step, anchors, f"non-finite discriminator loss at step {step}", loss_d=info.loss)
            if not info.applied:
                result.skipped_steps += 1
            if update_anchors and config.gamma_anneal_rate > 0:
                anchors = anneal_gamma(anchors, config.gamma_anneal_target, config.gamma_anneal_rate)
            msg = single_anchor_violation(spec, anchors)
            if msg:
                if result.constraint_warnings == 0:
                    log.warning("step %d: %s", step, msg)
                result.constraint_warnings += 1
        z = noise_rng.standard_normal((config.batch, config.z_dim))
        real = pts[batch_rng.integers(0, n, size=config.batch)] if spec.family is LossFamily.RA_HINGE else None
        info = g_step(nets, z, spec, real)
        if not math.isfinite(info.loss):
            return _abort(result, step, anchors, f"non-finite generator loss at step {step}", loss_g=info.loss)
        if not info.applied:
            result.skipped_steps += 1
        if step % config.eval_every == 0 or step == config.total_g_steps:
            result.record.append(evaluator.row(step, nets, anchors))

    result.anchors = anchors
    return result


def _abort(result: TrainResult, step: int, anchors: AnchorState, reason: str, **losses) -> TrainResult:
    log.error(reason)
    result.record.append(_nan_row(step, anchors, **losses))
    result.anchors = anchors
    result.aborted = True
    result.abort_reason = reason
    return result


def run_or_raise(config: TrainConfig, data: Dataset2D, reference: Optional[Dataset2D] = None) -> TrainResult:
    result = train(config, data, reference)
    if result.aborted:
        raise TrainingAborted(result.abort_reason)
    return result


def final_quarter_prediction_scale(record: RunRecord) -> float:
    """``max(|mean_d_real|, |mean_d_fake|)`` over the last quarter of eval rows."""
    steps = record.column("step")
    cut = steps[-1] * 0.75
    sel = steps >= cut
    return float(np.max(np.maximum(np.abs(record.column("mean_d_real")[sel]), np.abs(record.column("mean_d_fake")[sel]))))
