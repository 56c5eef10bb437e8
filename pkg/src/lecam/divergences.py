"""Exact f-divergences between finite discrete distributions.

Everything here works on :class:`DiscreteDistribution` values, which are
validated once at construction. Logarithms are natural. Total variation is
the unnormalized ``sum |P - Q|`` with range [0, 2].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from lecam.errors import DimensionError, DomainError

_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Nonnegative probability masses on a finite support."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64).ravel()
        if w.size < 1:
            raise DomainError("distribution needs at least one support point")
        if not np.all(np.isfinite(w)):
            raise DomainError("distribution weights must be finite")
        if np.any(w < 0):
            raise DomainError("distribution weights must be nonnegative")
        total = math.fsum(w)
        if abs(total - 1.0) > _SUM_TOL:
            raise DomainError(f"distribution weights sum to {total!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, raw: Sequence[float]) -> "DiscreteDistribution":
        """Build a distribution by rescaling nonnegative raw weights."""
        w = np.asarray(raw, dtype=np.float64).ravel()
        if w.size < 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("raw weights must be finite, nonnegative and nonempty")
        total = math.fsum(w)
        if total <= 0:
            raise DomainError("raw weights have zero total mass")
        w = w / total
        # one correction pass so fsum lands within tolerance
        w[np.argmax(w)] += 1.0 - math.fsum(w)
        return cls(w)

    def __len__(self) -> int:
        return self.weights.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __repr__(self) -> str:
        return f"DiscreteDistribution({self.weights.tolist()!r})"


class DivergenceKind(str, enum.Enum):
    LECAM = "lecam"
    JS = "js"
    CHI_SQUARED = "chi2"
    TOTAL_VARIATION = "tv"
    KL = "kl"


DistLike = Union[DiscreteDistribution, Sequence[float], np.ndarray]


def _as_dist(d: DistLike) -> DiscreteDistribution:
    return d if isinstance(d, DiscreteDistribution) else DiscreteDistribution(d)


def _pair(p: DistLike, q: DistLike) -> tuple[np.ndarray, np.ndarray]:
    p, q = _as_dist(p), _as_dist(q)
    if len(p) != len(q):
        raise DimensionError(f"support sizes differ: {len(p)} vs {len(q)}")
    return p.weights, q.weights


def lecam(p: DistLike, q: DistLike) -> float:
    """LeCam divergence (triangular discrimination) ``sum (P-Q)^2 / (P+Q)``.

    Points where both masses vanish contribute nothing.
    """
    pw, qw = _pair(p, q)
    s = pw + qw
    keep = s > 0
    diff = pw[keep] - qw[keep]
    return math.fsum(diff * diff / s[keep])


def _xlogy_ratio(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a * ln(a / b) with 0 * ln(0 / b) = 0; caller guarantees b > 0 where a > 0
    out = np.zeros_like(a)
    m = a > 0
    out[m] = a[m] * np.log(a[m] / b[m])
    return out


def _kl(pw: np.ndarray, qw: np.ndarray) -> float:
    if np.any((qw == 0) & (pw > 0)):
        return math.inf
    return math.fsum(_xlogy_ratio(pw, qw))


def _js(pw: np.ndarray, qw: np.ndarray) -> float:
    m = 0.5 * (pw + qw)
    return 0.5 * math.fsum(_xlogy_ratio(pw, m)) + 0.5 * math.fsum(_xlogy_ratio(qw, m))


def _chi2(pw: np.ndarray, qw: np.ndarray) -> float:
    if np.any((qw == 0) & (pw > 0)):
        return math.inf
    keep = qw > 0
    diff = pw[keep] - qw[keep]
    return math.fsum(diff * diff / qw[keep])


def divergence(kind: DivergenceKind | str, p: DistLike, q: DistLike) -> float:
    """Closed-form divergence of the given kind.

    KL and chi-squared return ``math.inf`` when ``q`` misses mass that ``p``
    has instead of raising.
    """
    kind = DivergenceKind(kind)
    pw, qw = _pair(p, q)
    if kind is DivergenceKind.LECAM:
        return lecam(p, q)
    if kind is DivergenceKind.JS:
        return _js(pw, qw)
    if kind is DivergenceKind.CHI_SQUARED:
        return _chi2(pw, qw)
    if kind is DivergenceKind.TOTAL_VARIATION:
        return math.fsum(np.abs(pw - qw))
    return _kl(pw, qw)


def all_divergences(p: DistLike, q: DistLike) -> dict[str, float]:
    return {k.value: divergence(k, p, q) for k in DivergenceKind}


def f_curve(kind: DivergenceKind | str, t: float) -> float:
    """Generator function ``f(t)`` of the divergence, with ``t = P/Q >= 0``."""
    kind = DivergenceKind(kind)
    t = float(t)
    if not t >= 0 or math.isnan(t):
        raise DomainError(f"f(t) needs t >= 0, got {t!r}")
    if kind is DivergenceKind.LECAM:
        return (t - 1.0) ** 2 / (t + 1.0)
    if kind is DivergenceKind.CHI_SQUARED:
        return (t - 1.0) ** 2
    if kind is DivergenceKind.TOTAL_VARIATION:
        return abs(t - 1.0)
    if kind is DivergenceKind.JS:
        head = t * math.log(2.0 * t / (1.0 + t)) if t > 0 else 0.0
        return 0.5 * (head + math.log(2.0 / (1.0 + t)))
    return t * math.log(t) if t > 0 else 0.0


# lim_{t -> inf} f(t) / t, used for points where q(x) = 0 < p(x)
_SLOPE_AT_INFINITY = {
    DivergenceKind.LECAM: 1.0,
    DivergenceKind.CHI_SQUARED: math.inf,
    DivergenceKind.TOTAL_VARIATION: 1.0,
    DivergenceKind.JS: 0.5 * math.log(2.0),
    DivergenceKind.KL: math.inf,
}


def slope_at_infinity(kind: DivergenceKind | str) -> float:
    return _SLOPE_AT_INFINITY[DivergenceKind(kind)]


def generic_f_divergence(
    f: DivergenceKind | str | Callable[[float], float],
    p: DistLike,
    q: DistLike,
    slope_inf: float | None = None,
) -> float:
    """Evaluate ``sum_x q(x) f(p(x)/q(x))`` for an arbitrary generator ``f``.

    When ``q(x) = 0 < p(x)`` the term is ``p(x) * lim f(t)/t``. For a named
    kind that limit is known; for a bare callable pass ``slope_inf``, else
    such points raise :class:`DomainError`.
    """
    if isinstance(f, (DivergenceKind, str)):
        kind = DivergenceKind(f)
        slope_inf = _SLOPE_AT_INFINITY[kind] if slope_inf is None else slope_inf

        def fn(t: float) -> float:
            return f_curve(kind, t)

    else:
        fn = f
    pw, qw = _pair(p, q)
    terms = []
    for pi, qi in zip(pw.tolist(), qw.tolist()):
        if qi > 0:
            terms.append(qi * fn(pi / qi))
        elif pi > 0:
            if slope_inf is None:
                raise DomainError("q has a zero where p has mass and no limit of f(t)/t was given")
            if math.isinf(slope_inf):
                return math.inf
            terms.append(pi * slope_inf)
    return math.fsum(terms)


def inequality_chain(p: DistLike, q: DistLike) -> tuple[float, float, float, float]:
    """Return ``(Δ/4, JS, Δ/2, TV/2)``, which should be nondecreasing."""
    pw, qw = _pair(p, q)
    delta = lecam(p, q)
    tv = math.fsum(np.abs(pw - qw))
    return 0.25 * delta, _js(pw, qw), 0.5 * delta, 0.5 * tv
