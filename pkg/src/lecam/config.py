"""Experiment configuration: sectioned INI text, strict keys, typed values.

Every key has a default, so an empty file is a valid config. The resolved
config is written back out as ``config.snapshot`` and hashing that text
(minus ``[output]``) names the run directory.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

from lecam.data import Dataset2D, Source, load_csv, make_grid, make_ring, subsample
from lecam.errors import ConfigError, LecamError
from lecam.losses import LossFamily, LossSpec
from lecam.trainer import TrainConfig


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_widths(s: str) -> tuple[int, ...]:
    parts = [p.strip() for p in s.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty width list")
    return tuple(int(p) for p in parts)


def _parse_opt_float(s: str) -> Optional[float]:
    s = s.strip()
    return None if s.lower() in ("", "none") else float(s)


def _parse_opt_str(s: str) -> Optional[str]:
    s = s.strip()
    return None if s.lower() in ("", "none") else s


def _fmt(v: Any) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    if isinstance(v, LossFamily) or isinstance(v, Source):
        return v.value
    return str(v)


@dataclass(frozen=True)
class DatasetSection:
    type: Source = Source.RING8
    n: int = 1000
    modes: int = 8
    radius: float = 2.0
    spacing: float = 1.0
    std: float = 0.05
    fraction: float = 0.1
    seed: int = 0
    csv_path: Optional[str] = None


@dataclass(frozen=True)
class ModelSection:
    g_hidden: tuple[int, ...] = (64, 64)
    d_hidden: tuple[int, ...] = (64, 64)
    z_dim: int = 2


@dataclass(frozen=True)
class TrainSection:
    loss: LossFamily = LossFamily.HINGE
    lam: float = 0.3
    gamma: float = 0.99
    d_steps: int = 2
    batch: int = 64
    lr_g: float = 2e-4
    lr_d: float = 2e-4
    total_g_steps: int = 20000
    eval_every: int = 500
    eval_samples: int = 2000
    seed: int = 0
    reg_real: bool = True
    reg_fake: bool = True
    single_anchor: bool = False
    constant_anchor: Optional[float] = None
    gamma_anneal_target: float = 0.999
    gamma_anneal_rate: float = 0.0


@dataclass(frozen=True)
class OutputSection:
    dir: str = "runs"


# config key -> dataclass field, where they differ
_KEY_ALIASES = {"train": {"lambda": "lam"}}

_PARSERS = {
    int: int,
    float: float,
    bool: _parse_bool,
    str: str,
    Source: Source,
    LossFamily: LossFamily,
    tuple[int, ...]: _parse_widths,
    Optional[float]: _parse_opt_float,
    Optional[str]: _parse_opt_str,
}

_SECTIONS = {
    "dataset": DatasetSection,
    "model": ModelSection,
    "train": TrainSection,
    "output": OutputSection,
}


def _field_types(cls) -> dict[str, Any]:
    import typing

    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in fields(cls)}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSection = field(default_factory=DatasetSection)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainSection = field(default_factory=TrainSection)
    output: OutputSection = field(default_factory=OutputSection)

    # --- parsing -----------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(
            inline_comment_prefixes=("#", ";"), interpolation=None, default_section="\0defaults"
        )
        cp.optionxform = str  # type: ignore[assignment]
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}".replace("\n", " ")) from exc
        parts = {}
        for name in cp.sections():
            if name not in _SECTIONS:
                raise ConfigError(f"unknown section [{name}]")
        for name, sec_cls in _SECTIONS.items():
            types = _field_types(sec_cls)
            aliases = _KEY_ALIASES.get(name, {})
            kwargs = {}
            if cp.has_section(name):
                for key, raw in cp.items(name):
                    attr = aliases.get(key, key)
                    if attr not in types or attr in aliases.values() and key not in aliases:
                        raise ConfigError(f"unknown key {name}.{key}")
                    try:
                        kwargs[attr] = _PARSERS[types[attr]](raw)
                    except (ValueError, TypeError) as exc:
                        raise ConfigError(f"bad value for {name}.{key}: {raw!r} ({exc})") from None
            parts[name] = sec_cls(**kwargs)
        cfg = cls(**parts)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        return cls.from_text(text)

    def validate(self) -> None:
        ds, tr = self.dataset, self.train
        if not tr.lam >= 0:
            raise ConfigError("train.lambda must be >= 0")
        if not 0.0 < ds.fraction <= 1.0:
            raise ConfigError("dataset.fraction must lie in (0, 1]")
        if ds.type is Source.CSV and not ds.csv_path:
            raise ConfigError("dataset.csv_path is required when dataset.type = csv")
        if ds.type is Source.GRID25 and math.isqrt(ds.modes) ** 2 != ds.modes:
            raise ConfigError("dataset.modes must be a perfect square for a grid")
        if tr.constant_anchor is not None and not math.isfinite(tr.constant_anchor):
            raise ConfigError("train.constant_anchor must be finite")
        try:
            self.train_config()
        except LecamError as exc:
            raise ConfigError(f"train: {exc}") from None

    # --- conversion --------------------------------------------------------

    def loss_spec(self) -> LossSpec:
        t = self.train
        return LossSpec(t.loss, t.lam, t.reg_real, t.reg_fake, t.single_anchor)

    def train_config(self) -> TrainConfig:
        t, m = self.train, self.model
        return TrainConfig(
            loss=self.loss_spec(),
            d_steps_per_g=t.d_steps,
            batch=t.batch,
            total_g_steps=t.total_g_steps,
            lr_g=t.lr_g,
            lr_d=t.lr_d,
            gamma=t.gamma,
            eval_every=t.eval_every,
            seed=t.seed,
            g_hidden=m.g_hidden,
            d_hidden=m.d_hidden,
            z_dim=m.z_dim,
            eval_samples=t.eval_samples,
            constant_anchor=t.constant_anchor,
            gamma_anneal_target=t.gamma_anneal_target,
            gamma_anneal_rate=t.gamma_anneal_rate,
        )

    def build_data(self) -> tuple[Dataset2D, Dataset2D]:
        """``(training subset, full reference set)``."""
        ds = self.dataset
        try:
            if ds.type is Source.RING8:
                full = make_ring(ds.n, ds.modes, ds.radius, ds.std, seed=ds.seed)
            elif ds.type is Source.GRID25:
                full = make_grid(ds.n, math.isqrt(ds.modes), ds.spacing, ds.std, seed=ds.seed)
            else:
                full = load_csv(ds.csv_path)
            return subsample(full, fraction=ds.fraction, seed=ds.seed), full
        except LecamError:
            raise
        except ValueError as exc:
            raise ConfigError(f"dataset: {exc}") from None

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None, **train_kw) -> "ExperimentConfig":
        cfg = self
        tr = cfg.train
        if seed is not None:
            tr = replace(tr, seed=int(seed))
        if train_kw:
            tr = replace(tr, **train_kw)
        cfg = replace(cfg, train=tr)
        if out is not None:
            cfg = replace(cfg, output=OutputSection(str(out)))
        cfg.validate()
        return cfg

    # --- serialization -----------------------------------------------------

    def to_text(self, include_output: bool = True) -> str:
        buf = io.StringIO()
        for name, sec_cls in _SECTIONS.items():
            if name == "output" and not include_output:
                continue
            sec = getattr(self, name)
            inverse = {v: k for k, v in _KEY_ALIASES.get(name, {}).items()}
            buf.write(f"[{name}]\n")
            for f in fields(sec_cls):
                buf.write(f"{inverse.get(f.name, f.name)} = {_fmt(getattr(sec, f.name))}\n")
            buf.write("\n")
        return buf.getvalue()

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_text(include_output=False).encode("utf-8")).hexdigest()

    def run_dir_name(self) -> str:
        return f"{self.content_hash()[:12]}-seed{self.train.seed}"
