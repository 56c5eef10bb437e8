"""Synthetic 2-D mixtures and limited-data subsampling."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from lecam.errors import ConfigError, IngestionError


class Source(str, enum.Enum):
    RING8 = "ring"
    GRID25 = "grid"
    CSV = "csv"


@dataclass(frozen=True, eq=False)
class Dataset2D:
    points: np.ndarray
    mode_centers: Optional[np.ndarray] = None
    mode_std: Optional[float] = None
    source: Source = Source.CSV

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ConfigError(f"dataset needs an (n >= 1, 2) point array, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ConfigError("dataset coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


def _mixture(centers: np.ndarray, n: int, std: float, rng: np.random.Generator) -> np.ndarray:
    labels = rng.integers(0, centers.shape[0], size=n)
    return centers[labels] + std * rng.standard_normal((n, 2))


def ring_centers(modes: int = 8, radius: float = 2.0) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(modes) / modes
    return radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)


def grid_centers(side: int = 5, spacing: float = 1.0) -> np.ndarray:
    ticks = (np.arange(side) - (side - 1) / 2.0) * spacing
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def make_ring(
    n: int, modes: int = 8, radius: float = 2.0, std: float = 0.05, seed: int = 0
) -> Dataset2D:
    """``n`` points drawn uniformly over ``modes`` Gaussians on a circle."""
    if modes < 1 or n < modes or not radius > 0 or not std > 0:
        raise ConfigError(f"invalid ring parameters n={n} modes={modes} radius={radius} std={std}")
    centers = ring_centers(modes, radius)
    pts = _mixture(centers, n, std, np.random.default_rng(seed))
    return Dataset2D(pts, centers, std, Source.RING8)


def make_grid(n: int, side: int = 5, spacing: float = 1.0, std: float = 0.02, seed: int = 0) -> Dataset2D:
    if side < 1 or n < side * side or not spacing > 0 or not std > 0:
        raise ConfigError(f"invalid grid parameters n={n} side={side} spacing={spacing} std={std}")
    centers = grid_centers(side, spacing)
    pts = _mixture(centers, n, std, np.random.default_rng(seed))
    return Dataset2D(pts, centers, std, Source.GRID25)


def subset_size(n: int, fraction: float | None = None, count: int | None = None) -> int:
    if (fraction is None) == (count is None):
        raise ConfigError("give exactly one of fraction or count")
    if count is not None:
        k = int(count)
    else:
        if not 0.0 < fraction <= 1.0:
            raise ConfigError(f"fraction must lie in (0, 1], got {fraction!r}")
        k = int(math.floor(fraction * n + 0.5))
    if k < 1:
        raise ConfigError("subsample would be empty")
    if k > n:
        raise ConfigError(f"subsample of {k} points exceeds dataset size {n}")
    return k


def subsample(
    ds: Dataset2D, fraction: float | None = None, count: int | None = None, seed: int = 0
) -> Dataset2D:
    """Uniform subset without replacement; the full-size case is the identity."""
    n = len(ds)
    k = subset_size(n, fraction, count)
    if k == n:
        return ds
    idx = np.sort(np.random.default_rng(seed).choice(n, size=k, replace=False))
    return Dataset2D(ds.points[idx], ds.mode_centers, ds.mode_std, ds.source)


def load_csv(path: str | Path) -> Dataset2D:
    """Read ``x,y`` rows; a non-numeric first row is taken as a header."""
    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 2:
                    raise IngestionError(f"{path}: line {lineno}: expected 2 columns, got {len(row)}")
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if lineno == 1:
                        continue
                    raise IngestionError(f"{path}: line {lineno}: non-numeric value {row!r}") from None
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    pts = np.array(rows)
    if not np.all(np.isfinite(pts)):
        raise IngestionError(f"{path}: non-finite coordinates")
    return Dataset2D(pts, source=Source.CSV)


def save_csv(ds: Dataset2D, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("x,y\n")
        for x, y in ds.points:
            fh.write(f"{x:.17g},{y:.17g}\n")
