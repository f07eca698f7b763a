"""Equiprobable scenario sets drawn inside forecast bands."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..domain import CaseConfig, ForecastBand

THREE_POINT = "three_point"
WEIBULL = "weibull"
GENERATORS = (THREE_POINT, WEIBULL)

# quantiles of the Weibull draw pinned to the band edges
Q_LO, Q_HI = 0.01, 0.99


@dataclass
class ScenarioSet:
    """``values[name]`` has shape (n, T); every scenario has probability 1/n."""

    n: int
    generator: str
    seed: int | None
    values: dict[str, np.ndarray]
    bands: dict[str, ForecastBand]
    params: dict = field(default_factory=dict)

    @property
    def probability(self) -> float:
        return 1.0 / self.n

    def get(self, name: str, w: int) -> np.ndarray:
        return self.values[name][w]


def _weibull_quantile(p: float, shape: float) -> float:
    return (-math.log(1.0 - p)) ** (1.0 / shape)


def generate_scenarios(bands: dict[str, ForecastBand], n: int, generator: str = THREE_POINT,
                       seed: int | None = 0, probabilities=(1 / 3, 1 / 3, 1 / 3),
                       shape: float = 2.0) -> ScenarioSet:
    """Sample ``n`` scenarios per band, independently per period.

    ``three_point`` picks lower / median / upper with ``probabilities``.
    ``weibull`` draws W ~ Weibull(shape) and maps it affinely so the 1% and
    99% quantiles land on the band edges, then clamps into the band. Bands
    are visited in insertion order, so a seed fixes the whole set.
    """
    if n < 1:
        raise ValueError("need at least one scenario")
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}; expected one of {GENERATORS}")
    probs = np.asarray(probabilities, dtype=float)
    if probs.shape != (3,) or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("three-point probabilities must be 3 nonnegative numbers summing to 1")
    if shape <= 0:
        raise ValueError("Weibull shape must be positive")
    rng = np.random.default_rng(seed)
    q_lo, q_hi = _weibull_quantile(Q_LO, shape), _weibull_quantile(Q_HI, shape)
    values = {}
    for name, band in bands.items():
        lo, med, hi = band.lower, band.median, band.upper
        if generator == THREE_POINT:
            pick = rng.choice(3, size=(n, band.T), p=probs)
            out = np.where(pick == 0, lo, np.where(pick == 1, med, hi))
        else:
            w = rng.weibull(shape, size=(n, band.T))
            out = lo + (w - q_lo) / (q_hi - q_lo) * (hi - lo)
            out = np.clip(out, lo, hi)
        values[name] = np.asarray(out, dtype=float)
    return ScenarioSet(n, generator, seed, values, dict(bands),
                       {"probabilities": probs.tolist(), "shape": shape})


def case_bands(cfg: CaseConfig, key: str = "DAM_SRM") -> dict[str, ForecastBand]:
    """Uncertain inputs of one session, named ``price:<stream>``, ``ndres:<id>``,
    ``stu:<id>`` and ``demand:<id>:<profile index>``."""
    spec = cfg.session(key)
    out: dict[str, ForecastBand] = {}
    for stream in spec.streams:
        out[f"price:{stream}"] = spec.prices[stream]
    for u in cfg.ndres:
        out[f"ndres:{u.id}"] = u.forecast(key)
    for u in cfg.stu:
        out[f"stu:{u.id}"] = u.forecast(key)
    for d in cfg.demand:
        for j, pr in enumerate(d.profiles):
            out[f"demand:{d.id}:{j}"] = ForecastBand(pr.median, pr.pos_dev, np.zeros_like(pr.median))
    return out


def case_scenarios(cfg: CaseConfig, n: int, generator: str = THREE_POINT, seed: int | None = 0,
                   key: str = "DAM_SRM", **kw) -> ScenarioSet:
    return generate_scenarios(case_bands(cfg, key), n, generator, seed, **kw)
