"""Closed-form coverage probability, mean RSS and the inverse design solvers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.special import erfc

from .antenna import AntennaPattern, B_MAX, B_MIN, gain_3d
from .channel import (
    SUBURBAN,
    Environment,
    ShadowingParams,
    SPEED_OF_LIGHT,
    shadowing_for_frequency,
    shadowing_stats,
)
from .errors import DomainError, UnboundedRadiusError

# Location-variability spreads are not published with the model; these
# defaults reproduce the published radius/beamwidth landmarks.
DEFAULT_SIGMA_L = 3.0
DEFAULT_SIGMA_N = 8.0

RADIUS_STEP = 50.0
RADIUS_CAP = 100_000.0
RADIUS_TOL = 1.0
BEAM_STEP = 0.5
BEAM_TOL = 0.01


@dataclass(frozen=True)
class Deployment:
    """One UAV scenario. ``gamma`` (receiver threshold) is derived, never stored."""

    h: float = 1000.0
    t_dbm: float = 40.0
    f_ghz: float = 2.0
    pl_max: float = 115.0
    sigma_l: float = DEFAULT_SIGMA_L
    sigma_n: float = DEFAULT_SIGMA_N
    epsilon: float = 0.8
    env: Environment = SUBURBAN
    shadow: Optional[ShadowingParams] = None
    antenna: AntennaPattern = field(default_factory=AntennaPattern)

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError(f"height must be positive, got {self.h}")
        if not self.f_ghz > 0:
            raise DomainError("frequency must be positive")
        if not (self.sigma_l > 0 and self.sigma_n > 0):
            raise DomainError("sigma_l and sigma_n must be positive")
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.shadow is None:
            object.__setattr__(self, "shadow", shadowing_for_frequency(self.f_ghz))

    @property
    def gamma(self) -> float:
        return self.t_dbm - self.pl_max

    @property
    def beamwidth(self) -> float:
        if not self.antenna.symmetric:
            raise DomainError("circular-footprint formulas need b_phi == b_theta")
        return self.antenna.b_phi

    def with_beamwidth(self, b: float) -> "Deployment":
        return replace(self, antenna=replace(self.antenna, b_phi=b, b_theta=b))

    def with_height(self, h: float) -> "Deployment":
        return replace(self, h=h)


@dataclass(frozen=True)
class GroundPoint:
    """Ground location relative to the UAV nadir (metres)."""

    x: float
    y: float = 0.0

    @classmethod
    def polar(cls, r: float, theta_deg: float = 0.0) -> "GroundPoint":
        t = math.radians(theta_deg)
        return cls(r * math.cos(t), r * math.sin(t))

    @property
    def r(self) -> float:
        return math.hypot(self.x, self.y)


def q_function(z):
    """Standard Gaussian tail probability."""
    q = 0.5 * erfc(np.asarray(z, dtype=float) / math.sqrt(2.0))
    return float(q) if np.ndim(q) == 0 else q


def _fspl(f_ghz, d):
    return 20.0 * np.log10(4.0 * np.pi * f_ghz * 1e9 * d / SPEED_OF_LIGHT)


def _los(env: Environment, e):
    raw = 0.01 * env.j - 0.01 * (env.j - env.k) / (1.0 + ((e - env.l) / env.m) ** env.n)
    return np.clip(raw, 0.0, 1.0)


def _shadow(s: ShadowingParams, e):
    mu = (s.p_mu + e) / (s.q_mu + s.t_mu * e)
    sigma = np.maximum((s.p_sigma + e) / (s.q_sigma + s.t_sigma * e), 0.0)
    return mu, sigma


def _check_d(d):
    if np.any(~(np.asarray(d) > 0)):
        raise DomainError("slant distance must be positive")


def exceed_prob_nlos(dep: Deployment, gain, d, elevation):
    """P[R_n >= gamma] for the given antenna gain, slant range and elevation."""
    _check_d(d)
    mu, sigma, _ = shadowing_stats(dep.shadow, elevation)
    z = (_fspl(dep.f_ghz, np.asarray(d, float)) + mu - np.asarray(gain, float) - dep.pl_max) / np.sqrt(
        np.asarray(sigma) ** 2 + dep.sigma_n**2
    )
    return q_function(z)


def exceed_prob_los(dep: Deployment, gain, d):
    """P[R_l >= gamma]."""
    _check_d(d)
    if not dep.sigma_l > 0:
        raise DomainError("sigma_l must be positive")
    z = (_fspl(dep.f_ghz, np.asarray(d, float)) - np.asarray(gain, float) - dep.pl_max) / dep.sigma_l
    return q_function(z)


def footprint_gain(p: AntennaPattern, phi_ms, theta_ms):
    """Antenna gain toward a ground point.

    With zero tilt the boresight is vertical, the azimuth term does not apply
    and the floor is dropped, giving the single-lobe circular form. Any tilt
    uses the full weighted pattern.
    """
    if p.phi_tilt == 0.0:
        g_max = 10.0 * np.log10(29000.0 / (p.b_phi * p.b_theta))
        return g_max - 12.0 * (np.asarray(phi_ms, float) / p.b_phi) ** 2
    return gain_3d(p, phi_ms, theta_ms)


def coverage_probability(dep: Deployment, pt: GroundPoint | None = None, *, x=None, y=None):
    """Coverage probability at a Cartesian ground point (or arrays ``x``, ``y``)."""
    if pt is not None:
        x, y = pt.x, pt.y
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h = dep.h
    rho = np.hypot(x, y)
    phi = np.degrees(np.arctan2(rho, h))
    theta = np.degrees(np.arctan2(y, x))
    e = 90.0 - phi
    d = np.sqrt(h * h + x * x + y * y)
    g = footprint_gain(dep.antenna, phi, theta)
    p = _mixture(dep, e, d, g)
    return float(p) if np.ndim(p) == 0 else p


def _mixture(dep: Deployment, e, d, g):
    pl = _los(dep.env, e)
    mu, sig = _shadow(dep.shadow, e)
    fs = _fspl(dep.f_ghz, d)
    p_los = 0.5 * erfc(((fs - g - dep.pl_max) / dep.sigma_l) / math.sqrt(2.0))
    p_nlos = 0.5 * erfc(((fs + mu - g - dep.pl_max) / np.sqrt(sig**2 + dep.sigma_n**2)) / math.sqrt(2.0))
    return pl * p_los + (1.0 - pl) * p_nlos


def _pcov_circular(dep: Deployment, r, h, b):
    """Vectorised circular coverage; ``r``, ``h``, ``b`` broadcast together."""
    phi = np.degrees(np.arctan2(r, h))
    e = np.degrees(np.arctan2(h, r))
    d = np.sqrt(h * h + r * r)
    g = 10.0 * np.log10(29000.0 / (b * b)) - 12.0 * ((phi - dep.antenna.phi_tilt) / b) ** 2
    return _mixture(dep, e, d, g)


def coverage_probability_circular(r, dep: Deployment):
    """Coverage probability on the circle of radius ``r`` for a symmetric beam."""
    b = dep.beamwidth
    r = np.asarray(r, dtype=float)
    if np.any(~(r >= 0)):
        raise DomainError("radius must be non-negative")
    p = _pcov_circular(dep, r, dep.h, b)
    return float(p) if np.ndim(p) == 0 else p


def mean_rss(r, dep: Deployment):
    """Expected received signal strength (dBm) at ground distance ``r``."""
    b = dep.beamwidth
    r = np.asarray(r, dtype=float)
    if np.any(~(r >= 0)):
        raise DomainError("radius must be non-negative")
    h = dep.h
    phi = np.degrees(np.arctan2(r, h))
    e = np.degrees(np.arctan2(h, r))
    g = 10.0 * np.log10(29000.0 / b**2) - 12.0 * ((phi - dep.antenna.phi_tilt) / b) ** 2
    pn = 1.0 - _los(dep.env, e)
    mu, _ = _shadow(dep.shadow, e)
    out = dep.t_dbm + g - _fspl(dep.f_ghz, np.hypot(h, r)) - pn * mu
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- solvers


@dataclass(frozen=True)
class RadiusSolution:
    r_m: float
    multi_annulus: bool = False


def _radius_batch(dep: Deployment, h, b, chunk: int = 256):
    """Coverage radius for arrays of (h, b) pairs.

    Returns ``(r, multi, unbounded)``. Pairs not covered at r = 1 m get 0.
    """
    h = np.atleast_1d(np.asarray(h, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    h, b = np.broadcast_arrays(h, b)
    h = h.ravel()
    b = b.ravel()
    grid = 1.0 + RADIUS_STEP * np.arange(int(RADIUS_CAP // RADIUS_STEP) + 1)
    eps = dep.epsilon
    out = np.zeros(h.size)
    multi = np.zeros(h.size, dtype=bool)
    unbounded = np.zeros(h.size, dtype=bool)
    for s in range(0, h.size, chunk):
        hh = h[s:s + chunk, None]
        bb = b[s:s + chunk, None]
        ok = _pcov_circular(dep, grid[None, :], hh, bb) >= eps
        first_bad = np.argmin(ok, axis=1)
        all_ok = ok.all(axis=1)
        covered = ok[:, 0]
        idx = np.nonzero(covered & ~all_ok)[0]
        unbounded[s:s + chunk] = covered & all_ok
        if idx.size == 0:
            continue
        j = first_bad[idx]
        lo = grid[j - 1].copy()
        hi = grid[j].copy()
        hs, bs = hh[idx, 0], bb[idx, 0]
        while np.any(hi - lo > RADIUS_TOL):
            mid = 0.5 * (lo + hi)
            good = _pcov_circular(dep, mid, hs, bs) >= eps
            lo = np.where(good, mid, lo)
            hi = np.where(good, hi, mid)
        out[s + idx] = lo
        # any covered grid node past the first drop means a detached annulus
        tail = ok[idx] & (np.arange(grid.size)[None, :] > j[:, None])
        multi[s + idx] = tail.any(axis=1)
    return out, multi, unbounded


def radius_scan(dep: Deployment) -> RadiusSolution:
    """Coverage radius plus the detached-annulus diagnostic."""
    r, multi, unbounded = _radius_batch(dep, dep.h, dep.beamwidth)
    if unbounded[0]:
        raise UnboundedRadiusError(
            f"coverage stays >= {dep.epsilon} out to {RADIUS_CAP:.0f} m"
        )
    return RadiusSolution(float(r[0]), bool(multi[0]))


def solve_coverage_radius(dep: Deployment) -> float:
    """Largest disc radius (m) over which coverage probability stays >= epsilon.

    Scans outward in 50 m steps up to 100 km and bisects the first drop below
    epsilon to 1 m. Returns 0 when even r = 1 m is not covered.
    """
    return radius_scan(dep).r_m


def radius_grid(dep: Deployment, heights, beamwidths) -> np.ndarray:
    """Coverage radius for every (h, B) combination; shape (len(h), len(B)).

    Unbounded cells are NaN.
    """
    hs = np.asarray(heights, dtype=float)
    bs = np.asarray(beamwidths, dtype=float)
    if np.any(~(hs > 0)):
        raise DomainError("heights must be positive")
    if np.any(~((bs >= B_MIN) & (bs < B_MAX))):
        raise DomainError("beamwidths must lie in [1, 180)")
    H, Bm = np.meshgrid(hs, bs, indexing="ij")
    r, _, unb = _radius_batch(dep, H, Bm)
    r[unb] = np.nan
    return r.reshape(H.shape)


def _refine_roots(fn, lo, hi, f_lo, tol):
    """Vectorised bisection for sign changes of ``fn`` between ``lo`` and ``hi``."""
    lo = lo.copy()
    hi = hi.copy()
    f_lo = f_lo.copy()
    while np.any(hi - lo > tol):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        same = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(same, mid, lo)
        f_lo = np.where(same, f_mid, f_lo)
        hi = np.where(same, hi, mid)
    return lo, hi


def solve_beamwidths_for_radius(h: float, r_target: float, dep: Deployment) -> list[float]:
    """Beamwidths (deg) whose coverage radius at height ``h`` equals ``r_target``.

    Typically zero, one or two values (the two sides of the radius maximum).
    Every returned value reproduces ``r_target`` within 2 m.
    """
    if not r_target > 0:
        raise DomainError("target radius must be positive")
    if not h > 0:
        raise DomainError("height must be positive")
    bs = np.arange(B_MIN, B_MAX, BEAM_STEP)
    dep_h = dep.with_height(h)

    def resid(b):
        r, _, unb = _radius_batch(dep_h, h, b)
        r = np.where(unb, np.inf, r)
        return r - r_target

    f = resid(bs)
    exact = bs[f == 0.0]
    cross = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
    roots = list(exact)
    if cross.size:
        lo, hi = _refine_roots(resid, bs[cross], bs[cross + 1], f[cross], BEAM_TOL)
        f_lo, f_hi = resid(lo), resid(hi)
        for k in range(cross.size):
            a, b_, fa, fb = lo[k], hi[k], f_lo[k], f_hi[k]
            # keep halving where the radius is steep so the round trip holds
            for _ in range(40):
                if min(abs(fa), abs(fb)) <= 1.0:
                    break
                m = 0.5 * (a + b_)
                fm = float(resid(np.array([m]))[0])
                if np.sign(fm) == np.sign(fa):
                    a, fa = m, fm
                else:
                    b_, fb = m, fm
            best, fbest = (a, fa) if abs(fa) <= abs(fb) else (b_, fb)
            if abs(fbest) <= 2.0:
                roots.append(float(best))
    return sorted(float(x) for x in roots)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular ground grid, inclusive of both ends."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError("grid step must be positive")
        if not (self.x_max >= self.x_min and self.y_max >= self.y_min):
            raise DomainError("grid extent is inverted")
        if not all(map(math.isfinite, (self.x_min, self.x_max, self.y_min, self.y_max))):
            raise DomainError("grid extent must be finite")

    @classmethod
    def square(cls, half_side: float, step: float) -> "GridSpec":
        return cls(-half_side, half_side, -half_side, half_side, step)

    def axes(self):
        nx = int(round((self.x_max - self.x_min) / self.step)) + 1
        ny = int(round((self.y_max - self.y_min) / self.step)) + 1
        return (
            self.x_min + self.step * np.arange(nx),
            self.y_min + self.step * np.arange(ny),
        )


def coverage_map(dep: Deployment, grid: GridSpec):
    """Coverage probability on a ground grid: returns ``(xs, ys, P)`` with P[iy, ix]."""
    xs, ys = grid.axes()
    X, Y = np.meshgrid(xs, ys)
    return xs, ys, coverage_probability(dep, x=X, y=Y)
