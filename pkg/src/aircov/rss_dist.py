"""Analytic distribution of received signal strength.

RSS at a point is modelled as the LoS/NLoS-probability weighted sum
``S = P_l R_l + P_n R_n`` of two independent Gaussians (in dB), hence
Gaussian itself. The area form averages the point density over a square.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import ndtr

from .coverage import Deployment, _fspl, _los, _shadow
from .errors import DomainError

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class RssDistribution(NamedTuple):
    mu_s: np.ndarray | float
    sigma_s: np.ndarray | float
    a1: np.ndarray | float
    p_los: np.ndarray | float
    mu_sh: np.ndarray | float
    sigma_sh: np.ndarray | float
    sigma_sl: np.ndarray | float
    sigma_sn: np.ndarray | float


def _f(x):
    return float(x) if np.ndim(x) == 0 else x


def rss_moments(r, dep: Deployment, p_los: Optional[float] = None) -> RssDistribution:
    """Mean, std and link constant of the point RSS at ground distance ``r``.

    ``p_los`` forces the LoS probability (used for limiting-case checks).
    """
    b = dep.beamwidth
    r = np.asarray(r, dtype=float)
    if np.any(~(r >= 0)):
        raise DomainError("radius must be non-negative")
    h = dep.h
    phi = np.degrees(np.arctan2(r, h))
    e = np.degrees(np.arctan2(h, r))
    a1 = (
        dep.t_dbm
        + 10.0 * np.log10(29000.0 / b**2)
        - 12.0 * ((phi - dep.antenna.phi_tilt) / b) ** 2
        - _fspl(dep.f_ghz, np.hypot(h, r))
    )
    pl = _los(dep.env, e) if p_los is None else np.full_like(a1, float(p_los))
    pn = 1.0 - pl
    mu_sh, sigma_sh = _shadow(dep.shadow, e)
    sigma_sl = pl * dep.sigma_l
    sigma_sn = pn * np.sqrt(dep.sigma_n**2 + sigma_sh**2)
    sigma_s = np.sqrt(sigma_sl**2 + sigma_sn**2)
    mu_s = a1 - pn * mu_sh
    return RssDistribution(*(_f(v) for v in (mu_s, sigma_s, a1, pl, mu_sh, sigma_sh, sigma_sl, sigma_sn)))


def _normal_pdf(s, mu, sigma):
    z = (s - mu) / sigma
    return np.exp(-0.5 * z * z) / (_SQRT_2PI * sigma)


def rss_pdf(s, r, dep: Deployment):
    """Density (per dB) of the point RSS at ``s`` dBm."""
    m = rss_moments(r, dep)
    return _f(_normal_pdf(np.asarray(s, dtype=float), m.mu_s, m.sigma_s))


def rss_cdf(s, r, dep: Deployment):
    m = rss_moments(r, dep)
    return _f(ndtr((np.asarray(s, dtype=float) - m.mu_s) / m.sigma_s))


class ComponentPdfs(NamedTuple):
    """Densities of the LoS and NLoS weighted terms.

    A component whose weight is zero collapses to a point mass; its density
    is then ``None`` and the matching ``*_mean`` is its location.
    """

    los: Optional[np.ndarray]
    nlos: Optional[np.ndarray]
    los_degenerate: bool
    nlos_degenerate: bool
    los_mean: float
    nlos_mean: float


def component_pdfs(s, r: float, dep: Deployment, p_los: Optional[float] = None) -> ComponentPdfs:
    m = rss_moments(r, dep, p_los=p_los)
    s = np.asarray(s, dtype=float)
    pl = float(m.p_los)
    pn = 1.0 - pl
    los_mean = pl * m.a1
    nlos_mean = pn * (m.a1 - m.mu_sh)
    los_deg = not m.sigma_sl > 0
    nlos_deg = not m.sigma_sn > 0
    f_l = None if los_deg else _normal_pdf(s, los_mean, m.sigma_sl)
    f_n = None if nlos_deg else _normal_pdf(s, nlos_mean, m.sigma_sn)
    return ComponentPdfs(f_l, f_n, los_deg, nlos_deg, float(los_mean), float(nlos_mean))


# ------------------------------------------------------------- area form


def _cell_centres(side: float, n: int):
    if not side > 0:
        raise DomainError("region side must be positive")
    if n < 1:
        raise DomainError("need at least one quadrature cell")
    c = (np.arange(n) + 0.5) * (side / n) - side / 2.0
    X, Y = np.meshgrid(c, c)
    return np.hypot(X, Y).ravel()


def _area_moments(dep: Deployment, side: float, n: int):
    r = _cell_centres(side, n)
    # the field is radially symmetric: evaluate each distinct radius once
    ur, inv = np.unique(r, return_inverse=True)
    m = rss_moments(ur, dep)
    w = np.bincount(inv, minlength=ur.size) / r.size
    return np.atleast_1d(m.mu_s), np.atleast_1d(m.sigma_s), w


def area_pdf(dep: Deployment, side: float, s_grid, n: int = 200, chunk: int = 2048):
    """Density of RSS over a ``side`` x ``side`` square centred on the nadir.

    Midpoint rule on an ``n`` x ``n`` grid of cells.
    """
    s = np.atleast_1d(np.asarray(s_grid, dtype=float))
    mu, sig, w = _area_moments(dep, side, n)
    out = np.zeros(s.size)
    for k in range(0, mu.size, chunk):
        out += (w[k:k + chunk, None] * _normal_pdf(s[None, :], mu[k:k + chunk, None], sig[k:k + chunk, None])).sum(axis=0)
    return out


def area_cdf(dep: Deployment, side: float, s, n: int = 200, chunk: int = 2048):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    mu, sig, w = _area_moments(dep, side, n)
    out = np.zeros(s.size)
    for k in range(0, mu.size, chunk):
        out += (w[k:k + chunk, None] * ndtr((s[None, :] - mu[k:k + chunk, None]) / sig[k:k + chunk, None])).sum(axis=0)
    return out


def area_pdf_convergence(dep: Deployment, side: float, s_grid, n: int = 200) -> float:
    """Relative L1 change of the area density when the grid is refined n -> 2n."""
    s = np.asarray(s_grid, dtype=float)
    a = area_pdf(dep, side, s, n)
    b = area_pdf(dep, side, s, 2 * n)
    return float(np.abs(a - b).sum() / np.abs(b).sum())
