"""Run configuration: a YAML key-value file plus command-line overrides."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import yaml

from .aggregation import Encoder, Fingerprint
from .synth import BenchmarkConfig

__all__ = ["RunConfig", "load_config"]

DEFAULT_KS = (1, 2, 5, 10, 20)


@dataclass(frozen=True)
class RunConfig:
    """Operating point; defaults are d=4096, n_x=4, n_y=6, 200 features per image."""

    d: int = 4096
    seed: int = 42
    n_x: int = 4
    n_y: int = 6
    budget: Optional[int] = 200
    centering: str = "image"
    project: bool = True
    decorrelate: bool = True
    mode: str = "positional"
    ks: tuple = DEFAULT_KS
    benchmark: BenchmarkConfig = field(default_factory=BenchmarkConfig)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be positive, got {self.d}")
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("n_x and n_y must be >= 1")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.centering not in ("set", "image"):
            raise ValueError(f"centering must be 'set' or 'image', got {self.centering!r}")
        if self.mode not in ("uniform", "positional"):
            raise ValueError(f"mode must be 'uniform' or 'positional', got {self.mode!r}")
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        if any(k < 1 for k in self.ks):
            raise ValueError("every k must be >= 1")
        # one seed drives everything, the synthetic benchmark included
        if self.benchmark.seed != self.seed:
            object.__setattr__(self, "benchmark", self.benchmark.with_seed(self.seed))

    def encoder(self) -> Encoder:
        return Encoder(self.d, self.seed, self.n_x, self.n_y, self.budget, self.project, self.decorrelate)

    def fingerprint(self, method: str = "hdc", centering: str | None = None) -> Fingerprint:
        return self.encoder().fingerprint(method, centering or self.centering)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ks"] = list(self.ks)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
        bench = data.pop("benchmark", None) or {}
        cfg = cls(**data)
        if bench:
            bench = dict(bench)
            if bench.setdefault("seed", cfg.seed) != cfg.seed:
                raise ValueError("benchmark.seed must equal the run seed")
            cfg = replace(cfg, benchmark=BenchmarkConfig.from_dict(bench))
        return cfg

    def override(self, **kwargs) -> "RunConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        bench = kwargs.pop("benchmark", None)
        cfg = replace(self, **kwargs)
        if bench:
            cfg = replace(cfg, benchmark=replace(cfg.benchmark, **bench))
        return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    data = yaml.safe_load(Path(path).read_text())
    if data is not None and not isinstance(data, dict):
        raise ValueError(f"{path}: configuration must be a mapping")
    return RunConfig.from_dict(data or {})
