"""Seeded Monte Carlo simulation of the channel model.

Variates for sample ``i`` are a pure function of ``(seed, i, stream)``
(splitmix64 counter hashing), so any partition of the index range across
threads yields bit-identical results.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.special import ndtri

from .coverage import Deployment, _fspl, _los, _shadow
from .errors import DomainError

MODES = ("mixture", "weighted_sum")
BLOCK = 1 << 16
_Z95 = 1.959963984540054

# variate streams
_S_STATE, _S_XL, _S_XN, _S_XS, _S_X, _S_Y = range(6)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_samples: int = 100_000
    mode: str = "mixture"

    def __post_init__(self):
        if self.n_samples < 1:
            raise DomainError("n_samples must be >= 1")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")


def default_threads() -> int:
    env = os.environ.get("AIRCOV_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _stream_key(seed: int, stream: int) -> np.uint64:
    with np.errstate(over="ignore"):
        k = _mix(np.array([(seed & _MASK64)], dtype=np.uint64))
        k = _mix(k ^ np.uint64((stream + 1) * 0xD1B54A32D192ED03 & _MASK64))
    return k[0]


def uniforms(seed: int, index, stream: int) -> np.ndarray:
    """Open-interval uniforms for sample indices ``index`` on one stream."""
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _stream_key(seed, stream) + (idx + np.uint64(1)) * _GOLDEN
        bits = _mix(z) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def normals(seed: int, index, stream: int) -> np.ndarray:
    return ndtri(uniforms(seed, index, stream))


@dataclass(frozen=True)
class PointTarget:
    r: float


@dataclass(frozen=True)
class AreaTarget:
    """Square of the given side centred on the nadir; points drawn uniformly."""

    side: float


Target = Union[PointTarget, AreaTarget]


def _rss_block(dep: Deployment, target: Target, mode: str, seed: int, idx: np.ndarray) -> np.ndarray:
    b = dep.beamwidth
    h = dep.h
    if isinstance(target, AreaTarget):
        x = (uniforms(seed, idx, _S_X) - 0.5) * target.side
        y = (uniforms(seed, idx, _S_Y) - 0.5) * target.side
        r = np.hypot(x, y)
    else:
        r = np.full(idx.shape, float(target.r))
    phi = np.degrees(np.arctan2(r, h))
    e = np.degrees(np.arctan2(h, r))
    g = 10.0 * np.log10(29000.0 / b**2) - 12.0 * ((phi - dep.antenna.phi_tilt) / b) ** 2
    link = dep.t_dbm + g - _fspl(dep.f_ghz, np.hypot(h, r))
    pl = _los(dep.env, e)
    mu_sh, sigma_sh = _shadow(dep.shadow, e)
    x_l = dep.sigma_l * normals(seed, idx, _S_XL)
    x_n = dep.sigma_n * normals(seed, idx, _S_XN)
    x_s = mu_sh + sigma_sh * normals(seed, idx, _S_XS)
    r_los = link - x_l
    r_nlos = link - x_n - x_s
    if mode == "mixture":
        is_los = uniforms(seed, idx, _S_STATE) < pl
        return np.where(is_los, r_los, r_nlos)
    return pl * r_los + (1.0 - pl) * r_nlos


def simulate(dep: Deployment, target: Target, cfg: SimConfig, threads: int | None = None) -> np.ndarray:
    """All ``cfg.n_samples`` RSS draws (dBm), in index order."""
    threads = default_threads() if threads is None else max(1, int(threads))
    starts = range(0, cfg.n_samples, BLOCK)

    def run(s):
        idx = np.arange(s, min(s + BLOCK, cfg.n_samples), dtype=np.uint64)
        return _rss_block(dep, target, cfg.mode, cfg.seed, idx)

    if threads == 1 or len(starts) == 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    return np.concatenate(parts)


def sample_rss(dep: Deployment, r: float, cfg: SimConfig, index: int) -> float:
    """The ``index``-th RSS draw (dBm) at ground distance ``r``."""
    if index < 0:
        raise DomainError("sample index must be non-negative")
    idx = np.array([index], dtype=np.uint64)
    return float(_rss_block(dep, PointTarget(r), cfg.mode, cfg.seed, idx)[0])


class CoverageEstimate(NamedTuple):
    p_hat: float
    ci_low: float
    ci_high: float
    n: int


def wilson_interval(k: int, n: int, z: float = _Z95) -> tuple[float, float]:
    p = k / n
    den = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def estimate_coverage(dep: Deployment, r: float, cfg: SimConfig, threads: int | None = None) -> CoverageEstimate:
    """Fraction of mixture draws with RSS >= gamma, with a Wilson 95% interval."""
    if cfg.mode != "mixture":
        raise DomainError("coverage estimation samples the LoS/NLoS mixture")
    if cfg.n_samples < 100:
        raise DomainError("need at least 100 samples for an interval estimate")
    rss = simulate(dep, PointTarget(r), cfg, threads)
    k = int(np.count_nonzero(rss >= dep.gamma))
    lo, hi = wilson_interval(k, cfg.n_samples)
    return CoverageEstimate(k / cfg.n_samples, lo, hi, cfg.n_samples)


class Histogram(NamedTuple):
    edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    n: int


def empirical_pdf(
    dep: Deployment,
    target: Target,
    cfg: SimConfig,
    bins: int = 50,
    range: tuple[float, float] | None = None,
    threads: int | None = None,
) -> Histogram:
    """Density-normalised histogram of weighted-sum RSS draws."""
    if cfg.mode != "weighted_sum":
        raise DomainError("the RSS distribution is defined for the weighted-sum model")
    if bins < 10:
        raise DomainError("need at least 10 bins")
    rss = simulate(dep, target, cfg, threads)
    counts, edges = np.histogram(rss, bins=bins, range=range)
    inside = counts.sum()
    density = counts / (inside * np.diff(edges)) if inside else np.zeros(bins)
    return Histogram(edges, density, counts, cfg.n_samples)
