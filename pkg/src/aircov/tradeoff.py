"""Parameter sweeps over the radius/height/beamwidth design space."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channel import get_environment, shadowing_for_frequency
from .coverage import Deployment, coverage_probability_circular, radius_grid, solve_beamwidths_for_radius
from .errors import DomainError
from .montecarlo import SimConfig, estimate_coverage


def deployment_header(dep: Deployment) -> dict:
    a = dep.antenna
    s = dep.shadow
    return {
        "h_m": dep.h,
        "t_dbm": dep.t_dbm,
        "f_ghz": dep.f_ghz,
        "pl_max_db": dep.pl_max,
        "sigma_l_db": dep.sigma_l,
        "sigma_n_db": dep.sigma_n,
        "epsilon": dep.epsilon,
        "environment": dep.env.name,
        "env_params": {"j": dep.env.j, "k": dep.env.k, "l": dep.env.l, "m": dep.env.m, "n": dep.env.n},
        "shadowing": {
            "frequency": s.frequency,
            "p_mu": s.p_mu, "q_mu": s.q_mu, "t_mu": s.t_mu,
            "p_sigma": s.p_sigma, "q_sigma": s.q_sigma, "t_sigma": s.t_sigma,
        },
        "antenna": {
            "b_phi_deg": a.b_phi, "b_theta_deg": a.b_theta,
            "lambda_phi": a.lambda_phi, "lambda_theta": a.lambda_theta,
            "tilt_deg": a.phi_tilt, "theta_a_deg": a.theta_a, "a_max_db": a.a_max,
        },
    }


@dataclass
class Curve:
    """Ordered samples of one quantity against a swept parameter.

    ``values`` holds NaN where the point is infeasible.
    """

    param: str
    param_units: str
    value: str
    value_units: str
    params: np.ndarray
    values: np.ndarray
    label: dict = field(default_factory=dict)
    header: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.params.shape != self.values.shape:
            raise DomainError("params and values must have equal length")
        if self.params.size > 1 and np.any(np.diff(self.params) <= 0):
            raise DomainError("curve parameters must be strictly increasing")
        if not self.header:
            raise DomainError("curve header (deployment echo) is required")

    def argmax(self) -> tuple[float, float]:
        i = int(np.nanargmax(self.values))
        return float(self.params[i]), float(self.values[i])


def _grid(values, name, max_step=None):
    g = np.asarray(values, dtype=float)
    if g.ndim != 1 or g.size < 1:
        raise DomainError(f"{name} grid must be a non-empty 1-D sequence")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise DomainError(f"{name} grid must be strictly increasing")
    if max_step is not None and g.size > 1 and np.max(np.diff(g)) > max_step + 1e-12:
        raise DomainError(f"{name} grid step must not exceed {max_step}")
    return g


def sweep_radius_vs_beamwidth(dep: Deployment, heights: Sequence[float], b_grid: Sequence[float]) -> list[Curve]:
    """Coverage radius against beamwidth, one curve per height."""
    bs = _grid(b_grid, "beamwidth", max_step=2.0)
    hs = _grid(sorted(heights), "height")
    R = radius_grid(dep, hs, bs)
    hdr = deployment_header(dep)
    return [
        Curve("b", "deg", "r", "m", bs, R[i], {"h_m": float(h)}, hdr)
        for i, h in enumerate(hs)
    ]


def sweep_radius_vs_height(dep: Deployment, beamwidths: Sequence[float], h_grid: Sequence[float]) -> list[Curve]:
    """Coverage radius against height, one curve per beamwidth."""
    hs = _grid(h_grid, "height")
    bs = _grid(sorted(beamwidths), "beamwidth")
    R = radius_grid(dep, hs, bs)
    hdr = deployment_header(dep)
    return [
        Curve("h", "m", "r", "m", hs, R[:, j], {"b_deg": float(b)}, hdr)
        for j, b in enumerate(bs)
    ]


def sweep_beamwidth_vs_height(dep: Deployment, radii: Sequence[float], h_grid: Sequence[float]) -> list[Curve]:
    """Beamwidth needed to hold each radius as the height varies.

    Two branches per radius: ``rising`` where the radius grows with beamwidth
    (narrow-beam side of the optimum) and ``falling`` on the wide-beam side.
    Heights with no solution are NaN gaps.
    """
    hs = _grid(h_grid, "height")
    hdr = deployment_header(dep)
    curves = []
    for rt in radii:
        lower = np.full(hs.size, np.nan)
        upper = np.full(hs.size, np.nan)
        for i, h in enumerate(hs):
            for b in solve_beamwidths_for_radius(h, rt, dep):
                probe = max(1.0, b - 0.25)
                r_probe = radius_grid(dep, [h], [probe])[0, 0]
                if r_probe < rt:
                    lower[i] = b
                else:
                    upper[i] = b
        for name, vals in (("rising", lower), ("falling", upper)):
            curves.append(Curve("h", "m", "b", "deg", hs, vals, {"r_m": float(rt), "branch": name}, hdr))
    return curves


def frequency_environment_sweep(
    dep: Deployment,
    freqs: Sequence[float] = (2.0, 3.5, 5.5),
    envs: Sequence[str] = ("suburban", "highrise_urban"),
    b_grid: Sequence[float] = tuple(np.arange(1.0, 180.0, 1.0)),
    h: float = 3000.0,
    pl_max: float = 120.0,
) -> list[Curve]:
    """Radius against beamwidth for each (frequency, environment) pair."""
    bs = _grid(b_grid, "beamwidth", max_step=2.0)
    curves = []
    for env_name in envs:
        env = get_environment(env_name)
        for f in freqs:
            d = replace(dep, h=h, pl_max=pl_max, f_ghz=f, env=env, shadow=shadowing_for_frequency(f))
            R = radius_grid(d, [h], bs)[0]
            curves.append(Curve("b", "deg", "r", "m", bs, R, {"f_ghz": f, "environment": env_name}, deployment_header(d)))
    return curves


def gradient(curve: Curve) -> Curve:
    """Finite-difference slope of a curve on a uniform grid.

    Central differences inside, one-sided at the ends.
    """
    x = curve.params
    if x.size < 3:
        raise DomainError("need at least 3 grid points for a gradient")
    steps = np.diff(x)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise DomainError("gradient requires a uniform grid")
    g = np.gradient(curve.values, x)
    units = f"{curve.value_units}/{curve.param_units}"
    return Curve(curve.param, curve.param_units, f"d{curve.value}/d{curve.param}", units, x, g, dict(curve.label), curve.header)


@dataclass
class Sensitivity:
    heights: np.ndarray
    beamwidths: np.ndarray
    radius: np.ndarray
    dr_db: np.ndarray
    dr_dh: np.ndarray

    @property
    def max_dr_db(self) -> tuple[float, float, float]:
        """(max |dr/dB| in m/deg, height, beamwidth) at the maximum."""
        i, j = np.unravel_index(np.nanargmax(np.abs(self.dr_db)), self.dr_db.shape)
        return float(abs(self.dr_db[i, j])), float(self.heights[i]), float(self.beamwidths[j])

    @property
    def max_dr_dh(self) -> tuple[float, float, float]:
        i, j = np.unravel_index(np.nanargmax(np.abs(self.dr_dh)), self.dr_dh.shape)
        return float(abs(self.dr_dh[i, j])), float(self.heights[i]), float(self.beamwidths[j])

    @property
    def ratio(self) -> float:
        return self.max_dr_db[0] / self.max_dr_dh[0]


def sensitivity(
    dep: Deployment,
    heights: Sequence[float] = tuple(np.arange(100.0, 25001.0, 100.0)),
    beamwidths: Sequence[float] = tuple(np.arange(1.0, 180.0, 1.0)),
) -> Sensitivity:
    """Radius over a (height, beamwidth) grid and its partial differences."""
    hs = _grid(heights, "height")
    bs = _grid(beamwidths, "beamwidth")
    if hs.size < 3 or bs.size < 3:
        raise DomainError("need at least 3 grid points along each axis")
    R = radius_grid(dep, hs, bs)
    return Sensitivity(hs, bs, R, np.gradient(R, bs, axis=1), np.gradient(R, hs, axis=0))


def spot_check(dep: Deployment, h: float, b: float, r: float, cfg: SimConfig, n_sigma: float = 3.0):
    """Compare analytic coverage at (h, b, r) with a Monte Carlo estimate.

    Returns ``(analytic, estimate, agrees)`` where agreement is within
    ``n_sigma`` binomial standard errors.
    """
    d = dep.with_height(h).with_beamwidth(b)
    p = coverage_probability_circular(r, d)
    est = estimate_coverage(d, r, cfg)
    se = np.sqrt(max(p * (1 - p), 1.0 / cfg.n_samples) / cfg.n_samples)
    return p, est.p_hat, abs(est.p_hat - p) <= n_sigma * se
