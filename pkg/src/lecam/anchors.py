"""Moving-average anchors tracking the discriminator's mean predictions."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from lecam.errors import DomainError, NumericError

DEFAULT_GAMMA = 0.99


@dataclass(frozen=True)
class AnchorState:
    """EMA pair ``(alpha_r, alpha_f)`` with decay ``gamma``.

    ``alpha_r`` follows predictions on real samples and ``alpha_f`` those on
    generated samples. Both start at 0.
    """

    alpha_r: float = 0.0
    alpha_f: float = 0.0
    gamma: float = DEFAULT_GAMMA
    step: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {self.gamma!r}")
        if self.step < 0:
            raise DomainError("step count must be nonnegative")
        if not (math.isfinite(self.alpha_r) and math.isfinite(self.alpha_f)):
            raise NumericError("anchor values must be finite")


def ema_update(state: AnchorState, v_real: float, v_fake: float) -> AnchorState:
    """One update ``alpha <- gamma * alpha + (1 - gamma) * v`` of both anchors."""
    v_real, v_fake = float(v_real), float(v_fake)
    if not (math.isfinite(v_real) and math.isfinite(v_fake)):
        raise NumericError(f"non-finite anchor observation ({v_real!r}, {v_fake!r})")
    g = state.gamma
    return replace(
        state,
        alpha_r=g * state.alpha_r + (1.0 - g) * v_real,
        alpha_f=g * state.alpha_f + (1.0 - g) * v_fake,
        step=state.step + 1,
    )


def single_anchor_view(state: AnchorState) -> float:
    """The single anchor ``alpha``; the fake-side anchor is then ``-alpha``."""
    return state.alpha_r


def effective_anchors(state: AnchorState, single_anchor: bool = False) -> tuple[float, float]:
    """``(alpha_r, alpha_f)`` as seen by the regularizer."""
    if single_anchor:
        a = single_anchor_view(state)
        return a, -a
    return state.alpha_r, state.alpha_f


def anneal_gamma(state: AnchorState, target: float, rate: float) -> AnchorState:
    """Move ``gamma`` a fraction ``rate`` of the way towards ``target`` (< 1)."""
    if not 0.0 <= target < 1.0 or not 0.0 <= rate <= 1.0:
        raise DomainError("anneal target must be in [0, 1) and rate in [0, 1]")
    return replace(state, gamma=state.gamma + rate * (target - state.gamma))
