"""Multi-UAV planning with circle and hexagonal packing of the target area."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .coverage import Deployment, radius_grid, solve_beamwidths_for_radius
from .errors import DomainError, UnsupportedError

SCHEMES = ("circle", "hex")
N_MAX = 10


class PackingEntry(NamedTuple):
    n: int
    r_ratio_circle: float
    r_ratio_hex: float
    c_circle: float
    c_hex: float


# cell radius / target radius, and best total coverage in percent
PACKING_TABLE = (
    PackingEntry(1, 1.000, 1.000, 100.0, 100.0),
    PackingEntry(2, 0.500, 0.447, 50.0, 75.0),
    PackingEntry(3, 0.464, 0.500, 64.6, 75.0),
    PackingEntry(4, 0.413, 0.400, 68.6, 75.0),
    PackingEntry(5, 0.370, 0.333, 68.5, 75.0),
    PackingEntry(6, 0.333, 0.286, 66.6, 75.0),
    PackingEntry(7, 0.333, 0.333, 77.8, 77.8),
    PackingEntry(8, 0.302, 0.286, 73.3, 72.7),
    PackingEntry(9, 0.275, 0.250, 68.9, 69.2),
    PackingEntry(10, 0.261, 0.286, 68.7, 75.0),
)

# tolerance on the coverage threshold, in percentage points
C_TOLERANCE = 1.0


def packing_entry(n: int, scheme: str = "hex") -> tuple[float, float]:
    """(cell radius / target radius, total coverage percent) for ``n`` UAVs."""
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}")
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= N_MAX):
        raise UnsupportedError(f"packing tabulated for 1..{N_MAX} UAVs, got {n}")
    e = PACKING_TABLE[n - 1]
    if scheme == "hex":
        return e.r_ratio_hex, e.c_hex
    return e.r_ratio_circle, e.c_circle


def hex_area(circumradius: float) -> float:
    return 1.5 * math.sqrt(3.0) * circumradius**2


def hex_coverage_n3(r_t: float = 1.0) -> float:
    """Share (percent) of a hexagonal target covered by three half-size hexagons."""
    return 100.0 * 3.0 * hex_area(0.5 * r_t) / hex_area(r_t)


# ------------------------------------------------------------ fleet sizing


@dataclass(frozen=True)
class MaxRadius:
    r_m: float
    h_m: float
    b_deg: float


@lru_cache(maxsize=64)
def max_single_radius(
    dep: Deployment,
    h_max: float = 5000.0,
    h_step: float = 250.0,
    b_step: float = 2.0,
) -> MaxRadius:
    """Largest coverage radius over heights (0, h_max] and beamwidths (1, 180).

    Coarse grid search followed by a local refinement around the best cell.
    """
    hs = np.arange(h_step, h_max + 0.5 * h_step, h_step)
    bs = np.arange(1.0 + b_step, 180.0, b_step)
    R = radius_grid(dep, hs, bs)
    i, j = np.unravel_index(np.nanargmax(R), R.shape)
    h0, b0 = hs[i], bs[j]
    hf = np.arange(max(h0 - h_step, h_step / 10), min(h0 + h_step, h_max) + 1e-9, h_step / 10)
    bf = np.arange(max(b0 - b_step, 1.0 + 1e-6), min(b0 + b_step, 179.99) + 1e-9, b_step / 8)
    Rf = radius_grid(dep, hf, bf)
    k, m = np.unravel_index(np.nanargmax(Rf), Rf.shape)
    if Rf[k, m] >= R[i, j]:
        return MaxRadius(float(Rf[k, m]), float(hf[k]), float(bf[m]))
    return MaxRadius(float(R[i, j]), float(h0), float(b0))


@dataclass
class FleetPlan:
    n: Optional[int]
    scheme: str
    r_t_m: float
    c_min: float
    epsilon: float
    r_cell_m: Optional[float] = None
    coverage_percent: Optional[float] = None
    h_m: Optional[float] = None
    b_deg: Optional[float] = None
    r_max_single_m: Optional[float] = None
    search: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.n is not None

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "n": self.n,
            "scheme": self.scheme,
            "r_t_m": self.r_t_m,
            "c_min": self.c_min,
            "epsilon": self.epsilon,
            "r_cell_m": self.r_cell_m,
            "coverage_percent": self.coverage_percent,
            "per_uav": {"h_m": self.h_m, "b_deg": self.b_deg, "r_m": self.r_cell_m},
            "r_max_single_m": self.r_max_single_m,
            "search": self.search,
        }


def _widest_beam(dep: Deployment, h: float, b_lo: float, r_target: float, tol: float = 0.01) -> float:
    """Widest beamwidth above ``b_lo`` whose radius at ``h`` still reaches ``r_target``.

    Requires radius(b_lo) >= r_target; bisection keeps that side.
    """
    def radius(b):
        return radius_grid(dep, [h], [b])[0, 0]

    hi = 180.0 - tol
    if radius(hi) >= r_target:
        return hi
    lo = b_lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if radius(mid) >= r_target:
            lo = mid
        else:
            hi = mid
    return lo


def feasible_counts(c_min: float, scheme: str = "hex") -> list[int]:
    """Fleet sizes whose packing reaches ``c_min`` (within the 1-point tolerance)."""
    return [n for n in range(1, N_MAX + 1) if packing_entry(n, scheme)[1] >= c_min - C_TOLERANCE]


def min_uavs(
    r_t: float,
    c_min: float,
    dep: Deployment,
    scheme: str = "hex",
    h_max: float = 5000.0,
) -> FleetPlan:
    """Smallest fleet whose packed cells are reachable by one UAV each."""
    if not r_t > 0:
        raise DomainError("target radius must be positive")
    best = max_single_radius(dep, h_max)
    plan = FleetPlan(
        None, scheme, float(r_t), float(c_min), dep.epsilon,
        r_max_single_m=best.r_m,
        search={"h_range_m": [0.0, h_max], "b_range_deg": [1.0, 180.0], "coarse_grid": [250.0, 2.0]},
    )
    for n in feasible_counts(c_min, scheme):
        ratio, cov = packing_entry(n, scheme)
        if ratio * r_t <= best.r_m:
            plan.n = n
            plan.r_cell_m = ratio * r_t
            plan.coverage_percent = cov
            plan.h_m = best.h_m
            plan.b_deg = _widest_beam(dep, best.h_m, best.b_deg, plan.r_cell_m)
            break
    return plan


class FleetBeam(NamedTuple):
    n: int
    r_cell_m: float
    b_deg: Optional[float]

    @property
    def feasible(self) -> bool:
        return self.b_deg is not None


def fleet_cell_radius(n: int, r_t: float, c_min: float, shrink: bool = True) -> float:
    """Per-UAV radius for a hex fleet.

    With ``shrink`` the cell is scaled down by area when ``c_min`` is below
    the packing's coverage, since only that fraction must be served.
    """
    ratio, cov = packing_entry(n, "hex")
    if not shrink:
        return ratio * r_t
    return ratio * r_t * math.sqrt(min(1.0, c_min / cov))


def beamwidth_for_fleet(
    n: int, r_t: float, h: float, c_min: float, dep: Deployment, shrink: bool = True
) -> FleetBeam:
    """Widest beamwidth giving each of ``n`` UAVs at height ``h`` its cell radius."""
    r_n = fleet_cell_radius(n, r_t, c_min, shrink)
    sols = solve_beamwidths_for_radius(h, r_n, dep)
    return FleetBeam(n, r_n, max(sols) if sols else None)


# -------------------------------------------------------------- altitude


class AltitudeOptions(NamedTuple):
    heights: list
    h_peak: float
    r_peak: float


def altitude_options(
    b: float,
    r_target: float,
    dep: Deployment,
    h_range: tuple[float, float] = (0.0, 5000.0),
    h_step: float = 50.0,
) -> AltitudeOptions:
    """Heights in ``h_range`` where beamwidth ``b`` covers exactly ``r_target``.

    Also returns the radius-maximising height on the scan.
    """
    if not r_target > 0:
        raise DomainError("target radius must be positive")
    lo_h, hi_h = h_range
    hs = np.arange(max(lo_h, 0.0) + h_step, hi_h + 0.5 * h_step, h_step)
    hs = hs[hs <= hi_h]
    if hs.size < 2:
        raise DomainError("height range too small for the scan step")

    def radius_at(h):
        return radius_grid(dep, np.atleast_1d(h), [b])[:, 0]

    r = radius_at(hs)
    k = int(np.nanargmax(r))
    fine = np.arange(max(hs[k] - h_step, h_step / 50), min(hs[k] + h_step, hi_h) + 1e-9, h_step / 50)
    rf = radius_at(fine)
    kf = int(np.nanargmax(rf))
    h_peak, r_peak = float(fine[kf]), float(rf[kf])

    f = r - r_target
    roots = [float(h) for h in hs[f == 0.0]]
    for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]:
        a, c = hs[i], hs[i + 1]
        fa = f[i]
        while c - a > 1.0:
            m = 0.5 * (a + c)
            fm = radius_at(m)[0] - r_target
            if np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                c = m
        fc = radius_at(c)[0] - r_target
        best, fb = (a, fa) if abs(fa) <= abs(fc) else (c, fc)
        if abs(fb) <= 2.0:
            roots.append(float(best))
    return AltitudeOptions(sorted(roots), h_peak, r_peak)


def altitude_profile(
    b: float,
    r_t: float,
    dep: Deployment,
    scheme: str = "hex",
    h_range: tuple[float, float] = (0.0, 5000.0),
    select: str = "highest",
) -> list[tuple[int, float, Optional[float], list]]:
    """Per fleet size: (n, cell radius, selected height, all heights).

    ``select`` picks among multiple feasible heights: ``highest`` or ``lowest``.
    """
    if select not in ("highest", "lowest"):
        raise DomainError("select must be 'highest' or 'lowest'")
    out = []
    for n in range(1, N_MAX + 1):
        ratio, _ = packing_entry(n, scheme)
        opts = altitude_options(b, ratio * r_t, dep, h_range)
        chosen = None
        if opts.heights:
            chosen = max(opts.heights) if select == "highest" else min(opts.heights)
        out.append((n, ratio * r_t, chosen, opts.heights))
    return out
