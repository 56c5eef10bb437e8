"""LeCam regularization for GANs trained on limited data, at toy scale."""

from lecam.anchors import AnchorState, ema_update, single_anchor_view
from lecam.divergences import (
    DiscreteDistribution,
    DivergenceKind,
    divergence,
    f_curve,
    generic_f_divergence,
    lecam,
)
from lecam.losses import (
    BatchPredictions,
    LossFamily,
    LossSpec,
    discriminator_objective,
    generator_objective,
    r_lc,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorState",
    "BatchPredictions",
    "DiscreteDistribution",
    "DivergenceKind",
    "LossFamily",
    "LossSpec",
    "discriminator_objective",
    "divergence",
    "ema_update",
    "f_curve",
    "generator_objective",
    "generic_f_divergence",
    "lecam",
    "r_lc",
    "single_anchor_view",
]
