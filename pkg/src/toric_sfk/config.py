"""Run configuration for the verification pipeline and the command line."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class Tolerances:
    newton: float = 1e-12
    symmetry: float = 1e-10
    r_consistency: float = 1e-8
    # scalar curvature: |s| <= curvature_constant * h^2 at h = curvature_h
    curvature_constant: float = 100.0
    curvature_h: float = 1e-3
    curvature_ratio: float = 3.5
    harmonicity: float = 1e-5
    closure: float = 1e-8
    trace: float = 1e-10
    decay_slope: float = -1.9

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "decay_slope":
                if not v < 0:
                    raise ValueError("decay_slope must be negative")
            elif not v > 0:
                raise ValueError(f"tolerance {f.name} must be positive, got {v}")

    @property
    def curvature(self) -> float:
        return self.curvature_constant * self.curvature_h**2


@dataclass(frozen=True)
class RunConfig:
    polytope_path: Path | None = None
    variant: str | None = None
    grid: int = 256
    mesh: int = 50
    harmonic_grid: int = 32
    tolerances: Tolerances = field(default_factory=Tolerances)
    out_dir: Path = Path("out")
    recenter: int | None = None
    threads: int = 1

    def __post_init__(self):
        for name in ("grid", "mesh", "harmonic_grid"):
            if getattr(self, name) < 16:
                raise ValueError(f"{name} must be at least 16, got {getattr(self, name)}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.variant not in (None, "cusp", "smooth", "conical"):
            raise ValueError(f"unknown variant {self.variant!r}")

    @classmethod
    def from_env(cls, **kwargs) -> "RunConfig":
        raw = os.environ.get("TORIC_SFK_THREADS")
        if raw and "threads" not in kwargs:
            kwargs["threads"] = max(1, int(raw))
        return cls(**kwargs)

    def with_tolerances(self, **overrides) -> "RunConfig":
        return replace(self, tolerances=replace(self.tolerances, **overrides))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["polytope_path"] = None if self.polytope_path is None else str(self.polytope_path)
        # neither changes results; keep them out of the deterministic body
        out.pop("out_dir")
        out.pop("threads")
        return out
