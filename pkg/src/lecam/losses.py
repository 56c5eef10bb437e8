"""GAN loss families, the LeCam regularizer and the regularized D objective.

Each family is defined through per-prediction mapping functions: the
discriminator maximizes ``V_D = E_real[f_D(D(x))] + E_fake[f_G(D(G(z)))]``
and the generator minimizes ``L_G = E_fake[g_G(D(G(z)))]``. RaHinge is the
exception and is evaluated at batch level.

All predictions are raw discriminator outputs (logits). The ``*_and_grads``
variants also return the derivative of the scalar loss with respect to each
prediction, which the trainer feeds into backpropagation.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from lecam.anchors import AnchorState, effective_anchors
from lecam.errors import DimensionError, DomainError, NumericError

log = logging.getLogger(__name__)

DEFAULT_LAMBDA = 0.3


class LossFamily(str, enum.Enum):
    WGAN = "wgan"
    HINGE = "hinge"
    NON_SATURATED = "nonsaturated"
    LEAST_SQUARES = "lsgan"
    RA_HINGE = "rahinge"


@dataclass(frozen=True)
class LossSpec:
    family: LossFamily = LossFamily.HINGE
    lam: float = DEFAULT_LAMBDA
    reg_real: bool = True
    reg_fake: bool = True
    single_anchor: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", LossFamily(self.family))
        if not self.lam >= 0:
            raise DomainError(f"lambda must be >= 0, got {self.lam!r}")


def _vec(x: Sequence[float], name: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64).ravel()
    if a.size == 0:
        raise DimensionError(f"{name} batch is empty")
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{name} contains non-finite predictions")
    return a


@dataclass(frozen=True, eq=False)
class BatchPredictions:
    d_real: np.ndarray = field()
    d_fake: np.ndarray = field()

    def __post_init__(self) -> None:
        object.__setattr__(self, "d_real", _vec(self.d_real, "d_real"))
        object.__setattr__(self, "d_fake", _vec(self.d_fake, "d_fake"))


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


# --- value of V_D and its gradient, per family ------------------------------


def value_d_and_grads(family: LossFamily, dr: np.ndarray, df: np.ndarray):
    """``V_D`` and its derivatives ``(dV/d d_real, dV/d d_fake)``."""
    nr, nf = dr.size, df.size
    if family is LossFamily.WGAN:
        v = dr.mean() - df.mean()
        return v, np.full(nr, 1.0 / nr), np.full(nf, -1.0 / nf)
    if family is LossFamily.HINGE:
        v = np.minimum(0.0, dr - 1.0).mean() + np.minimum(0.0, -1.0 - df).mean()
        return v, (dr < 1.0).astype(np.float64) / nr, -(df > -1.0).astype(np.float64) / nf
    if family is LossFamily.NON_SATURATED:
        v = (-_softplus(-dr)).mean() + (-_softplus(df)).mean()
        return v, expit(-dr) / nr, -expit(df) / nf
    if family is LossFamily.LEAST_SQUARES:
        v = (-((dr - 1.0) ** 2)).mean() + (-(df * df)).mean()
        return v, -2.0 * (dr - 1.0) / nr, -2.0 * df / nf
    # relativistic average hinge
    mr, mf = dr.mean(), df.mean()
    ar = 1.0 - (dr - mf)
    af = 1.0 + (df - mr)
    loss = np.maximum(0.0, ar).mean() + np.maximum(0.0, af).mean()
    act_r = (ar > 0).astype(np.float64)
    act_f = (af > 0).astype(np.float64)
    # d loss / d dr_i = -act_r_i / nr - sum(act_f) / (nf * nr)
    gr = -act_r / nr - act_f.sum() / (nf * nr)
    gf = act_f / nf + act_r.sum() / (nr * nf)
    return -loss, -gr, -gf


def generator_loss_and_grads(family: LossFamily, df: np.ndarray, dr: Optional[np.ndarray] = None):
    """``L_G`` and ``dL_G / d d_fake``."""
    nf = df.size
    if family in (LossFamily.WGAN, LossFamily.HINGE):
        return -df.mean(), np.full(nf, -1.0 / nf)
    if family is LossFamily.NON_SATURATED:
        return _softplus(-df).mean(), -expit(-df) / nf
    if family is LossFamily.LEAST_SQUARES:
        return ((df - 1.0) ** 2).mean(), 2.0 * (df - 1.0) / nf
    if dr is None:
        raise DimensionError("RaHinge generator loss needs real predictions")
    nr = dr.size
    mr, mf = dr.mean(), df.mean()
    af = 1.0 - (df - mr)
    ar = 1.0 + (dr - mf)
    loss = np.maximum(0.0, af).mean() + np.maximum(0.0, ar).mean()
    act_f = (af > 0).astype(np.float64)
    act_r = (ar > 0).astype(np.float64)
    gf = -act_f / nf - act_r.sum() / (nr * nf)
    return loss, gf


# --- regularizer ------------------------------------------------------------


def r_lc_and_grads(
    preds: BatchPredictions,
    anchors: AnchorState,
    reg_real: bool = True,
    reg_fake: bool = True,
    single_anchor: bool = False,
):
    alpha_r, alpha_f = effective_anchors(anchors, single_anchor)
    dr, df = preds.d_real, preds.d_fake
    value = 0.0
    gr = np.zeros_like(dr)
    gf = np.zeros_like(df)
    # real predictions are pulled to the fake anchor and vice versa
    if reg_real:
        e = dr - alpha_f
        value += float(np.mean(e * e))
        gr = 2.0 * e / dr.size
    if reg_fake:
        e = df - alpha_r
        value += float(np.mean(e * e))
        gf = 2.0 * e / df.size
    return value, gr, gf


def r_lc(
    preds: BatchPredictions,
    anchors: AnchorState,
    reg_real: bool = True,
    reg_fake: bool = True,
    single_anchor: bool = False,
) -> float:
    """``E_real[(D(x) - alpha_F)^2] + E_fake[(D(G(z)) - alpha_R)^2]``."""
    return r_lc_and_grads(preds, anchors, reg_real, reg_fake, single_anchor)[0]


def unregularized_d_loss_and_grads(family: LossFamily, preds: BatchPredictions):
    v, gr, gf = value_d_and_grads(LossFamily(family), preds.d_real, preds.d_fake)
    return -float(v), -gr, -gf


def discriminator_loss_and_grads(spec: LossSpec, preds: BatchPredictions, anchors: AnchorState):
    """``L_D = -V_D + lambda * R_LC`` with derivatives, plus the R_LC value."""
    loss, gr, gf = unregularized_d_loss_and_grads(spec.family, preds)
    reg, rr, rf = r_lc_and_grads(preds, anchors, spec.reg_real, spec.reg_fake, spec.single_anchor)
    # lambda = 0 must leave the loss and its gradients bit-for-bit untouched
    if spec.lam != 0:
        loss = loss + spec.lam * reg
        gr = gr + spec.lam * rr
        gf = gf + spec.lam * rf
    return loss, gr, gf, reg


def discriminator_objective(spec: LossSpec, preds: BatchPredictions, anchors: AnchorState) -> float:
    return discriminator_loss_and_grads(spec, preds, anchors)[0]


def generator_objective(
    spec: LossSpec, d_fake: Sequence[float], d_real: Optional[Sequence[float]] = None
) -> float:
    """``L_G``; never regularized."""
    df = _vec(d_fake, "d_fake")
    dr = None if d_real is None else _vec(d_real, "d_real")
    return float(generator_loss_and_grads(spec.family, df, dr)[0])


def single_anchor_violation(spec: LossSpec, anchors: AnchorState) -> Optional[str]:
    """Diagnostic text when ``lambda >= 1/(2 alpha)`` for the live anchor.

    Only meaningful with a single anchor and ``alpha > 0``; returns ``None``
    otherwise.
    """
    if not spec.single_anchor:
        return None
    alpha = anchors.alpha_r
    if alpha > 0 and 2.0 * spec.lam * alpha >= 1.0:
        return (
            f"lambda={spec.lam:g} >= 1/(2*alpha)={1.0 / (2.0 * alpha):g}: "
            "the implied LeCam weight is non-positive"
        )
    return None
