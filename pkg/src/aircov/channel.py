"""Air-to-ground channel primitives.

Elevation-dependent LoS probability, NLoS shadowing statistics, free-space
path loss and the UAV/ground geometry. All public angles are in degrees.
Functions accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, SingularityError

SPEED_OF_LIGHT = 299_792_458.0  # m/s

_POLE_TOL = 1e-9


@dataclass(frozen=True)
class Environment:
    """Empirical LoS-probability fit ``(j, k, l, m, n)`` for one environment."""

    name: str
    j: float
    k: float
    l: float
    m: float
    n: float

    def __post_init__(self):
        if not (self.m > 0 and self.n > 0):
            raise DomainError(f"environment {self.name!r}: m and n must be positive")


SUBURBAN = Environment("suburban", 101.6, 0.0, 0.0, 3.25, 1.241)
HIGHRISE_URBAN = Environment("highrise_urban", 352.0, -1.37, -53.0, 173.8, 4.670)

ENVIRONMENTS = {env.name: env for env in (SUBURBAN, HIGHRISE_URBAN)}


def get_environment(name: str) -> Environment:
    try:
        return ENVIRONMENTS[name]
    except KeyError:
        raise DomainError(
            f"unknown environment {name!r}; expected one of {sorted(ENVIRONMENTS)}"
        ) from None


@dataclass(frozen=True)
class ShadowingParams:
    """Rational fits for the NLoS shadowing mean and std versus elevation.

    Each statistic is ``(p + e) / (q + t * e)`` with ``e`` the elevation in
    degrees. With ``strict`` set, a row whose denominator changes sign (or
    vanishes) on [0, 90] degrees is rejected at construction.
    """

    frequency: float
    p_mu: float
    q_mu: float
    t_mu: float
    p_sigma: float
    q_sigma: float
    t_sigma: float
    strict: bool = True

    def __post_init__(self):
        if self.strict:
            for label, q, t in (("mean", self.q_mu, self.t_mu), ("std", self.q_sigma, self.t_sigma)):
                lo, hi = q, q + 90.0 * t
                if abs(lo) < _POLE_TOL or abs(hi) < _POLE_TOL or (lo > 0) != (hi > 0):
                    raise SingularityError(
                        f"shadowing {label} fit at {self.frequency} GHz has a pole "
                        f"inside [0, 90] deg (q={q}, t={t})"
                    )

    @property
    def pole_free(self) -> bool:
        for q, t in ((self.q_mu, self.t_mu), (self.q_sigma, self.t_sigma)):
            lo, hi = q, q + 90.0 * t
            if abs(lo) < _POLE_TOL or abs(hi) < _POLE_TOL or (lo > 0) != (hi > 0):
                return False
        return True


# Measured fits, stored exactly as tabulated. The 5.5 GHz std row has its
# denominator pole near 9.4 deg elevation, so it is built non-strict; use
# ``shadowing_for_frequency(5.5, t_sigma=...)`` to override the slope.
SHADOWING_TABLE = {
    2.0: ShadowingParams(2.0, -94.20, -3.44, 0.0318, -89.55, -8.87, 0.0927),
    3.5: ShadowingParams(3.5, -92.90, -3.14, 0.0302, -89.06, -8.63, 0.0921),
    5.5: ShadowingParams(5.5, -92.80, -2.90, 0.0285, -89.54, -8.47, 0.9000, strict=False),
}


def shadowing_for_frequency(
    f_ghz: float, interpolate: bool = False, t_sigma: float | None = None
) -> ShadowingParams:
    """Look up (or optionally interpolate) the shadowing fit for ``f_ghz``.

    ``t_sigma`` replaces the std-row slope; the result is then validated
    strictly.
    """
    freqs = sorted(SHADOWING_TABLE)
    if f_ghz in SHADOWING_TABLE:
        row = SHADOWING_TABLE[f_ghz]
    elif interpolate and freqs[0] <= f_ghz <= freqs[-1]:
        hi_i = next(i for i, f in enumerate(freqs) if f > f_ghz)
        a, b = SHADOWING_TABLE[freqs[hi_i - 1]], SHADOWING_TABLE[freqs[hi_i]]
        w = (f_ghz - a.frequency) / (b.frequency - a.frequency)
        vals = [
            (1 - w) * getattr(a, name) + w * getattr(b, name)
            for name in ("p_mu", "q_mu", "t_mu", "p_sigma", "q_sigma", "t_sigma")
        ]
        row = ShadowingParams(f_ghz, *vals, strict=False)
    else:
        raise DomainError(
            f"no shadowing fit for {f_ghz} GHz (tabulated: {freqs}); "
            "pass interpolate=True for frequencies inside the table"
        )
    if t_sigma is not None:
        row = ShadowingParams(
            row.frequency, row.p_mu, row.q_mu, row.t_mu,
            row.p_sigma, row.q_sigma, t_sigma, strict=True,
        )
    return row


class ShadowingStats(NamedTuple):
    mu: np.ndarray | float
    sigma: np.ndarray | float
    sigma_clamped: bool


@dataclass(frozen=True)
class Geometry:
    """UAV at height ``h`` over a ground point at horizontal distance ``r``."""

    h: float
    r: float

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError(f"height must be positive, got {self.h}")
        if not self.r >= 0:
            raise DomainError(f"ground distance must be non-negative, got {self.r}")

    @property
    def d(self) -> float:
        return math.hypot(self.h, self.r)

    @property
    def phi_ms(self) -> float:
        return math.degrees(math.atan2(self.r, self.h))

    @property
    def elevation(self) -> float:
        return math.degrees(math.atan2(self.h, self.r))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def elevation_angle(h, r):
    """Elevation of the UAV seen from the ground point, ``atan(h / r)`` in degrees."""
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(~(h > 0)):
        raise DomainError("height must be positive")
    if np.any(~(r >= 0)):
        raise DomainError("ground distance must be non-negative")
    return _scalar(np.degrees(np.arctan2(h, r)))


def off_nadir_angle(h, r):
    """Vertical angle from nadir to the ground point, ``atan(r / h)`` in degrees."""
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(~(h > 0)):
        raise DomainError("height must be positive")
    return _scalar(np.degrees(np.arctan2(r, h)))


def _check_elevation(elevation, lo_open=False):
    e = np.asarray(elevation, dtype=float)
    bad = (e <= 0) if lo_open else (e < 0)
    if np.any(bad | (e > 90) | np.isnan(e)):
        rng = "(0, 90]" if lo_open else "[0, 90]"
        raise DomainError(f"elevation must lie in {rng} degrees")
    return e


def los_probability(env: Environment, elevation):
    """LoS probability at the given elevation, clamped to [0, 1]."""
    e = _check_elevation(elevation)
    raw = 0.01 * env.j - 0.01 * (env.j - env.k) / (1.0 + ((e - env.l) / env.m) ** env.n)
    return _scalar(np.clip(raw, 0.0, 1.0))


def shadowing_stats(params: ShadowingParams, elevation) -> ShadowingStats:
    """Mean and std (dB) of NLoS shadowing; a negative std is clamped to 0 and flagged."""
    e = _check_elevation(elevation, lo_open=True)
    den_mu = params.q_mu + params.t_mu * e
    den_sigma = params.q_sigma + params.t_sigma * e
    if np.any(np.abs(den_mu) < _POLE_TOL) or np.any(np.abs(den_sigma) < _POLE_TOL):
        raise SingularityError(
            f"shadowing fit at {params.frequency} GHz evaluated at its pole"
        )
    mu = (params.p_mu + e) / den_mu
    sigma = (params.p_sigma + e) / den_sigma
    clamped = bool(np.any(sigma < 0))
    sigma = np.maximum(sigma, 0.0)
    return ShadowingStats(_scalar(mu), _scalar(sigma), clamped)


def fspl(f_ghz, d):
    """Free-space path loss in dB for frequency in GHz and distance in metres."""
    f = np.asarray(f_ghz, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(~(f > 0)):
        raise DomainError("frequency must be positive")
    if np.any(~(d > 0)):
        raise DomainError("distance must be positive")
    return _scalar(20.0 * np.log10(4.0 * np.pi * f * 1e9 * d / SPEED_OF_LIGHT))
