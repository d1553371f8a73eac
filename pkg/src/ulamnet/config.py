"""Experiment configuration and the per-figure presets."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import List, Optional

from .maps import MapSpec


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    map: MapSpec = field(default_factory=MapSpec)
    n_values: List[int] = field(default_factory=lambda: [1000])
    nc: int = 10_000
    seed: int = 42
    alpha_values: List[float] = field(default_factory=lambda: [0.85])
    z1_values: Optional[List[float]] = None
    a_values: Optional[List[float]] = None
    method: str = "auto"
    tol: float = 1e-12
    max_iter: Optional[int] = None
    dense_cap: int = 4000
    k: Optional[int] = None
    vectors: bool = False
    bins: int = 50
    gamma_max: Optional[float] = None
    t_iters: int = 10_000_000
    n_traj: int = 10
    burn_in: int = 10_000
    network: Optional[str] = None
    output_dir: str = "out"

    def __post_init__(self):
        if any(n < 2 for n in self.n_values):
            raise ValueError("every N must be >= 2")
        if self.nc < 1:
            raise ValueError("nc must be >= 1")
        if any(not 0.0 <= a <= 1.0 for a in self.alpha_values):
            raise ValueError("alpha must lie in [0, 1]")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.dense_cap < 2:
            raise ValueError("dense cap must be >= 2")
        if self.t_iters < 10 * self.burn_in:
            raise ValueError("t_iters must be at least 10 * burn_in")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["map"] = self.map.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "map" in d:
            d["map"] = MapSpec.from_dict(d["map"])
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON, ignoring where outputs go."""
        d = self.to_dict()
        d.pop("output_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


F1 = {"model": "f1", "z1": 2.0, "z2": 0.2, "a": 0.9}
F2 = {"model": "f2", "z1": 2.0, "z2": 0.2, "a": 0.9}
F2_ATTRACTOR = dict(F2, a=0.96)

# (desk-scale settings, paper-scale overrides)
PRESETS = {
    "fig2": ({"command": "build", "map": F1, "n_values": [50], "nc": 1_000_000}, {}),
    "fig3": ({"command": "links", "map": F1, "n_values": [100_000], "nc": 1_000},
             {"n_values": [1_000_000], "nc": 10_000}),
    "fig3b": ({"command": "links", "map": F2, "n_values": [100_000], "nc": 1_000},
              {"n_values": [1_000_000], "nc": 10_000}),
    "fig4": ({"command": "spectrum", "map": F1, "n_values": [2000], "alpha_values": [1.0],
              "vectors": True}, {"n_values": [12000], "dense_cap": 12000}),
    "fig4b": ({"command": "spectrum", "map": F2, "n_values": [2000], "alpha_values": [1.0],
               "vectors": True}, {"n_values": [12000], "dense_cap": 12000}),
    "fig5": ({"command": "spectrum", "map": F1, "n_values": [500, 1000, 2000],
              "alpha_values": [1.0], "gamma_max": 20.0},
             {"n_values": [1000, 4000, 12000], "dense_cap": 12000}),
    "fig5b": ({"command": "spectrum", "map": F2, "n_values": [500, 1000, 2000],
               "alpha_values": [1.0], "gamma_max": 20.0},
              {"n_values": [1000, 4000, 12000], "dense_cap": 12000}),
    "fig6": ({"command": "spectrum", "map": F1, "n_values": [4000], "alpha_values": [1.0],
              "k": 4, "vectors": True}, {"n_values": [12000]}),
    "fig8": ({"command": "pagerank", "map": F1, "n_values": [1000, 2000, 4000, 10000],
              "alpha_values": [1.0], "method": "eigen"},
             {"n_values": [1000, 2000, 4000, 8000, 12000, 16000]}),
    "fig9": ({"command": "spectrum", "map": F1, "n_values": [2000], "nc": 1_000_000,
              "alpha_values": [1.0], "vectors": True},
             {"n_values": [10000], "dense_cap": 10000}),
    "fig10": ({"command": "gapstudy", "map": F1, "n_values": [500, 1000, 2000, 4000],
               "alpha_values": [1.0]}, {"n_values": [1000, 2000, 4000, 8000, 16000]}),
    "fig11": ({"command": "pagerank", "map": F1, "n_values": [100_000], "nc": 1_000,
               "alpha_values": [1.0, 0.999, 0.99, 0.875]},
              {"nc": 10_000, "t_iters": 1_000_000_000}),
    "fig12": ({"command": "pagerank", "map": F1, "n_values": [100_000], "alpha_values": [1.0],
               "z1_values": [1.5, 2.0, 2.5, 3.0], "method": "trajectory"},
              {"t_iters": 1_000_000_000}),
    "fig13": ({"command": "pagerank", "map": F2_ATTRACTOR, "n_values": [100_000], "nc": 1_000,
               "alpha_values": [0.98, 0.9, 0.8, 0.7]}, {"nc": 10_000}),
    "fig14": ({"command": "scan", "map": F2, "n_values": [10_000],
               "a_values": [0.85, 0.88, 0.9, 0.92, 0.93, 0.94, 0.95, 0.96, 0.97, 0.98],
               "alpha_values": [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0]},
              {"n_values": [100_000], "nc": 1_000}),
}


def preset_config(name: str, paper_scale: bool = False, **overrides) -> ExperimentConfig:
    try:
        base, full = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    d = dict(base)
    if paper_scale:
        d.update(full)
    d.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(d)
