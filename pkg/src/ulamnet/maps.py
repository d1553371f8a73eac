"""Intermittency maps of the unit interval.

Both models share the left branch ``x + (2x)**z1 / 2`` on ``[0, 1/2)``.
Model 1 has a right branch with an integrable derivative singularity at
``x = 1`` controlled by ``z2``; model 2 has a sine hump of amplitude ``a``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

DOMAIN_TOL = 1e-12


class Model(str, enum.Enum):
    F1 = "f1"
    F2 = "f2"


@dataclass(frozen=True)
class MapSpec:
    """Map family member.

    ``z2`` is only used by model 1 and ``a`` only by model 2.
    """

    model: Model = Model.F1
    z1: float = 2.0
    z2: float = 0.2
    a: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if not self.z1 > 0:
            raise ValueError(f"z1 must be positive, got {self.z1}")
        if self.model is Model.F1 and not self.z2 > 0:
            raise ValueError(f"z2 must be positive, got {self.z2}")
        if self.model is Model.F2 and not 0 < self.a < 1:
            raise ValueError(f"a must lie in (0, 1), got {self.a}")

    @property
    def exponent_formulas_apply(self) -> bool:
        """False when the out-link exponent of model 1 is undefined (z2 >= 1)."""
        return self.model is Model.F2 or self.z2 < 1

    def to_dict(self) -> dict:
        return {"model": self.model.value, "z1": self.z1, "z2": self.z2, "a": self.a}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "MapSpec":
        unknown = set(data) - {"model", "z1", "z2", "a"}
        if unknown:
            raise ValueError(f"unknown MapSpec keys: {sorted(unknown)}")
        if "model" not in data:
            raise ValueError("MapSpec requires 'model'")
        kw = {k: float(v) for k, v in data.items() if k != "model"}
        return cls(model=Model(data["model"]), **kw)

    @classmethod
    def from_json(cls, text: str) -> "MapSpec":
        return cls.from_dict(json.loads(text))


def _check_domain(x: np.ndarray) -> None:
    if x.size and (np.min(x) < -DOMAIN_TOL or np.max(x) > 1 + DOMAIN_TOL):
        raise ValueError("map argument outside [0, 1]")


def eval_map_array(spec: MapSpec, x, check: bool = True) -> np.ndarray:
    """Vectorized map evaluation; see :func:`eval_map`."""
    x = np.asarray(x, dtype=np.float64)
    if check:
        _check_domain(x)
    x = np.clip(x, 0.0, 1.0)
    left = x < 0.5
    out = np.empty_like(x)
    xl = x[left]
    out[left] = xl + (2.0 * xl) ** spec.z1 / 2.0
    xr = x[~left]
    if spec.model is Model.F1:
        c = 0.5 ** spec.z2
        out[~left] = (2.0 * xr - 1.0 - (1.0 - xr) ** spec.z2 + c) / (1.0 + c)
    else:
        out[~left] = spec.a * np.sin(np.pi * (xr - 0.5))
    return np.clip(out, 0.0, 1.0, out=out)


def eval_map(spec: MapSpec, x: float) -> float:
    """Evaluate f1 or f2 at a point of [0, 1].

    The right branch is used at exactly ``x = 1/2``. Results are clamped to
    ``[0, 1]`` to absorb rounding at the endpoints.

    Raises
    ------
    ValueError
        If ``x`` lies outside ``[0, 1]`` by more than 1e-12.
    """
    if not (-DOMAIN_TOL <= x <= 1 + DOMAIN_TOL):
        raise ValueError(f"map argument {x!r} outside [0, 1]")
    # shares the array path so scalar and vector results agree bit-for-bit
    return float(eval_map_array(spec, np.array([float(x)]), check=False)[0])


def _slope(spec: MapSpec, x: float, h: float = 1e-6) -> float:
    lo, hi = max(x - h, 0.5), min(x + h, 1.0)
    return (eval_map(spec, hi) - eval_map(spec, lo)) / (hi - lo)


def find_fixed_point_attractor(spec: MapSpec, tol: float = 1e-12) -> Optional[Tuple[float, float]]:
    """Locate a stable fixed point of f2 on the right branch.

    Returns ``(x_star, slope)`` or ``None``. Model 1 is fully chaotic and
    always gives ``None``. The sine branch ``g(x) = a sin(pi (x - 1/2)) - x``
    is concave, so its roots on ``[1/2, 1]`` are bracketed around the maximum
    of ``g`` and refined by bisection; the root with ``|f'| < 1`` is returned.
    """
    if spec.model is not Model.F2:
        return None

    def g(x):
        return eval_map(spec, x) - x

    # argmax of g: a*pi*cos(pi(x-1/2)) = 1
    c = 1.0 / (spec.a * math.pi)
    xm = 0.5 + math.acos(c) / math.pi if c < 1 else 0.5
    if g(xm) < 0:
        return None

    def bisect(lo, hi):
        glo = g(lo)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            gm = g(mid)
            if (gm > 0) == (glo > 0):
                lo, glo = mid, gm
            else:
                hi = mid
        return 0.5 * (lo + hi)

    candidates = []
    if g(1.0) <= 0:
        candidates.append(bisect(xm, 1.0))
    if g(0.5) < 0:
        candidates.append(bisect(0.5, xm))
    for xs in candidates:
        s = _slope(spec, xs)
        if abs(s) < 1:
            return xs, s
    return None
