"""Command-line interface.

Exit status: 0 success, 2 invalid input, 3 infeasible (JSON body on stdout),
4 numerical failure, 64 unknown command.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from typing import Any, Callable, Optional

import numpy as np

from . import __version__, config as cfgmod, packing, tradeoff
from .antenna import gain_3d, gain_circular
from .channel import ENVIRONMENTS
from .coverage import (
    GridSpec,
    coverage_map,
    coverage_probability,
    coverage_probability_circular,
    radius_scan,
    solve_beamwidths_for_radius,
)
from .errors import AircovError, DomainError, SingularityError, UnboundedRadiusError, UnsupportedError
from .montecarlo import AreaTarget, PointTarget, empirical_pdf, estimate_coverage, default_threads
from .rss_dist import area_pdf, rss_pdf

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_USAGE = 0, 2, 3, 4, 64

COMMANDS = (
    "gain", "coverage", "radius", "beamwidths", "map", "rss-pdf", "area-pdf",
    "mc", "sweep", "gradient", "pack", "constants", "replay",
)


class Infeasible(Exception):
    def __init__(self, body: dict):
        super().__init__("infeasible")
        self.body = body


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad subcommand names are usage errors; bad option values are not
        if "invalid choice" in message and not message.startswith("argument -"):
            raise UsageError(message)
        super().error(message)


class Table:
    def __init__(self, columns: list[str], rows: list[list]):
        self.columns = columns
        self.rows = rows


# ------------------------------------------------------------- formatting


def fmt_num(v: Any) -> Any:
    """JSON-ready scalar: python floats (repr round-trips), NaN -> None."""
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) else v
    return v


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    return fmt_num(obj)


def _csv_cell(v: Any) -> str:
    v = fmt_num(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def _flat_record(rec: dict, prefix: str = "") -> dict[str, str]:
    """One CSV row: nested keys dotted, list items joined with ';'."""
    out = {}
    for k, v in rec.items():
        if isinstance(v, dict):
            out.update(_flat_record(v, f"{prefix}{k}."))
        elif isinstance(v, (list, tuple, np.ndarray)):
            out[prefix + k] = ";".join(_csv_cell(x) for x in v)
        else:
            out[prefix + k] = _csv_cell(v)
    return out


def render(result: Any, fmt: str, header: dict) -> str:
    conf_line = cfgmod.CONFIG_PREFIX + cfgmod.dumps_json(header["config"])
    run_line = cfgmod.RUN_PREFIX + cfgmod.dumps_json({k: v for k, v in header.items() if k != "config"})
    if fmt == "csv":
        buf = io.StringIO(newline="")
        buf.write(conf_line + "\n" + run_line + "\n")
        if isinstance(result, Table):
            buf.write(",".join(result.columns) + "\n")
            for row in result.rows:
                buf.write(",".join(_csv_cell(v) for v in row) + "\n")
        else:
            flat = _flat_record(result)
            buf.write(",".join(flat) + "\n")
            buf.write(",".join(flat.values()) + "\n")
        return buf.getvalue()
    body = {"provenance": header}
    if isinstance(result, Table):
        body["columns"] = result.columns
        body["rows"] = _clean(result.rows)
    else:
        body["result"] = _clean(result)
    return json.dumps(body, sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_output(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


# --------------------------------------------------------------- commands


def _linspace(lo: float, hi: float, step: float, name: str) -> np.ndarray:
    if not step > 0 or hi < lo:
        raise DomainError(f"{name}: need step > 0 and max >= min")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def cmd_gain(a, rc, dep):
    if a.r is not None:
        g = gain_circular(dep.beamwidth, dep.h, a.r, dep.antenna.phi_tilt)
        return {"b_deg": dep.beamwidth, "h_m": dep.h, "r_m": a.r, "gain_db": g}
    if a.phi_ms is None:
        raise DomainError("gain needs --r (circular form) or --phi-ms/--theta-ms")
    theta = 0.0 if a.theta_ms is None else a.theta_ms
    return {"phi_ms_deg": a.phi_ms, "theta_ms_deg": theta, "gain_db": gain_3d(dep.antenna, a.phi_ms, theta)}


def cmd_coverage(a, rc, dep):
    if a.x is not None or a.y is not None:
        x = 0.0 if a.x is None else a.x
        y = 0.0 if a.y is None else a.y
        return {"x_m": x, "y_m": y, "p_cov": coverage_probability(dep, x=x, y=y)}
    if a.r is None:
        raise DomainError("coverage needs --r or --x/--y")
    return {"h_m": dep.h, "b_deg": dep.beamwidth, "r_m": a.r, "p_cov": coverage_probability_circular(a.r, dep)}


def cmd_radius(a, rc, dep):
    sol = radius_scan(dep)
    return {"h_m": dep.h, "b_deg": dep.beamwidth, "r_m": sol.r_m, "epsilon": dep.epsilon,
            "multi_annulus": sol.multi_annulus}


def cmd_beamwidths(a, rc, dep):
    bs = solve_beamwidths_for_radius(dep.h, a.r_target, dep)
    body = {"h_m": dep.h, "r_m": a.r_target, "epsilon": dep.epsilon, "b_deg": bs}
    if not bs:
        raise Infeasible({**body, "feasible": False, "reason": "no beamwidth in [1, 180) reaches the radius"})
    return body


def cmd_map(a, rc, dep):
    if a.x_min is not None:
        grid = GridSpec(a.x_min, a.x_max, a.y_min, a.y_max, a.step)
    else:
        grid = GridSpec.square(a.half_side, a.step)
    xs, ys, P = coverage_map(dep, grid)
    rows = [[x, y, P[i, j]] for i, y in enumerate(ys) for j, x in enumerate(xs)]
    return Table(["x_m", "y_m", "p_cov"], rows)


def _s_grid(a):
    return _linspace(a.s_min, a.s_max, a.s_step, "s grid")


def cmd_rss_pdf(a, rc, dep):
    s = _s_grid(a)
    return Table(["s_dbm", "density"], [[v, d] for v, d in zip(s, rss_pdf(s, a.r, dep))])


def cmd_area_pdf(a, rc, dep):
    s = _s_grid(a)
    return Table(["s_dbm", "density"], [[v, d] for v, d in zip(s, area_pdf(dep, a.side, s, n=a.n_cells))])


def cmd_mc(a, rc, dep):
    threads = a.threads
    if a.mc_command == "coverage":
        cfg = rc.build_sim()
        est = estimate_coverage(dep, a.r, cfg, threads)
        return Table(["seed", "n_samples", "p_hat", "ci_low", "ci_high"],
                     [[cfg.seed, cfg.n_samples, est.p_hat, est.ci_low, est.ci_high]])
    cfg = rc.build_sim()
    if a.side is not None:
        target = AreaTarget(a.side)
    elif a.r is not None:
        target = PointTarget(a.r)
    else:
        raise DomainError("mc pdf needs --r or --side")
    rng = None if a.lo is None else (a.lo, a.hi)
    if (a.lo is None) != (a.hi is None):
        raise DomainError("--lo and --hi go together")
    h = empirical_pdf(dep, target, cfg, bins=a.bins, range=rng, threads=threads)
    return Table(["bin_lo_dbm", "bin_hi_dbm", "density"],
                 [[h.edges[i], h.edges[i + 1], h.density[i]] for i in range(h.density.size)])


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"expected a comma-separated list of numbers, got {text!r}") from None


def cmd_sweep(a, rc, dep):
    fam = a.family
    if fam == "radius-beamwidth":
        bs = _linspace(a.b_min, a.b_max, a.b_step, "beamwidth grid")
        curves = tradeoff.sweep_radius_vs_beamwidth(dep, _floats(a.heights), bs)
        rows = [[b, c.label["h_m"], r] for c in curves for b, r in zip(c.params, c.values)]
        table = Table(["b_deg", "h_m", "r_m"], rows)
    elif fam == "radius-height":
        hs = _linspace(a.h_min, a.h_max, a.h_step, "height grid")
        curves = tradeoff.sweep_radius_vs_height(dep, _floats(a.beamwidths), hs)
        rows = [[c.label["b_deg"], h, r] for c in curves for h, r in zip(c.params, c.values)]
        table = Table(["b_deg", "h_m", "r_m"], rows)
    elif fam == "beamwidth-height":
        hs = _linspace(a.h_min, a.h_max, a.h_step, "height grid")
        curves = tradeoff.sweep_beamwidth_vs_height(dep, _floats(a.radii), hs)
        rows = [[b, h, c.label["r_m"], c.label["branch"]] for c in curves for h, b in zip(c.params, c.values)]
        table = Table(["b_deg", "h_m", "r_m", "branch"], rows)
    else:
        bs = _linspace(a.b_min, a.b_max, a.b_step, "beamwidth grid")
        envs = a.envs.split(",") if a.envs else sorted(ENVIRONMENTS)
        curves = tradeoff.frequency_environment_sweep(
            dep, _floats(a.freqs), envs, bs, h=a.sweep_h, pl_max=a.sweep_pl_max)
        rows = [[b, a.sweep_h, r, c.label["f_ghz"], c.label["environment"]]
                for c in curves for b, r in zip(c.params, c.values)]
        table = Table(["b_deg", "h_m", "r_m", "f_ghz", "environment"], rows)
    table.manifest = {
        "family": fam,
        "columns": table.columns,
        "curves": [{"label": c.label, "param": c.param, "value": c.value, "deployment": c.header} for c in curves],
    }
    return table


def cmd_gradient(a, rc, dep):
    if a.summary:
        hs = _linspace(a.h_min, a.h_max, a.h_step, "height grid")
        bs = _linspace(a.b_min, a.b_max, a.b_step, "beamwidth grid")
        s = tradeoff.sensitivity(dep, hs, bs)
        (gb, hb, bb), (gh, hh, bh) = s.max_dr_db, s.max_dr_dh
        return {"max_dr_db_m_per_deg": gb, "at_b": {"h_m": hb, "b_deg": bb},
                "max_dr_dh_m_per_m": gh, "at_h": {"h_m": hh, "b_deg": bh}, "ratio": s.ratio}
    if a.wrt == "beamwidth":
        bs = _linspace(a.b_min, a.b_max, a.b_step, "beamwidth grid")
        curves = tradeoff.sweep_radius_vs_beamwidth(dep, _floats(a.heights), bs)
        rows = []
        for c in curves:
            g = tradeoff.gradient(c)
            rows += [[b, c.label["h_m"], r, d] for b, r, d in zip(c.params, c.values, g.values)]
        return Table(["b_deg", "h_m", "r_m", "dr_db"], rows)
    hs = _linspace(a.h_min, a.h_max, a.h_step, "height grid")
    curves = tradeoff.sweep_radius_vs_height(dep, _floats(a.beamwidths), hs)
    rows = []
    for c in curves:
        g = tradeoff.gradient(c)
        rows += [[c.label["b_deg"], h, r, d] for h, r, d in zip(c.params, c.values, g.values)]
    return Table(["b_deg", "h_m", "r_m", "dr_dh"], rows)


def cmd_pack(a, rc, dep):
    pc = a.pack_command
    if pc == "table":
        return Table(["n", "r_ratio_circle", "r_ratio_hex", "c_circle", "c_hex"],
                     [list(e) for e in packing.PACKING_TABLE])
    if pc == "min-uavs":
        plan = packing.min_uavs(a.rt, a.c_min, dep, a.scheme, h_max=a.h_max)
        if not plan.feasible:
            raise Infeasible(plan.to_dict())
        return plan.to_dict()
    if pc == "beamwidth":
        fb = packing.beamwidth_for_fleet(a.n, a.rt, dep.h, a.c_min, dep, shrink=not a.no_shrink)
        body = {"n": fb.n, "h_m": dep.h, "r_cell_m": fb.r_cell_m, "b_deg": fb.b_deg, "feasible": fb.feasible}
        if not fb.feasible:
            raise Infeasible(body)
        return body
    if pc == "altitude":
        if a.r_target is not None:
            r_t = a.r_target
        elif a.rt is not None and a.n is not None:
            r_t = packing.packing_entry(a.n, a.scheme)[0] * a.rt
        else:
            raise DomainError("pack altitude needs --r-target, or --rt with --uavs")
        opts = packing.altitude_options(dep.beamwidth, r_t, dep, (0.0, a.h_max))
        return {"b_deg": dep.beamwidth, "r_m": r_t, "h_m": opts.heights,
                "h_peak_m": opts.h_peak, "r_peak_m": opts.r_peak}
    rts = _linspace(a.rt_min, a.rt_max, a.rt_step, "target radius grid")
    rows = []
    for rt in rts:
        plan = packing.min_uavs(float(rt), a.c_min, dep, a.scheme, h_max=a.h_max)
        rows.append([rt, a.scheme, a.c_min, plan.n])
    return Table(["r_t_m", "scheme", "c_min", "n_min"], rows)


def cmd_constants(a, rc, dep):
    doc = cfgmod.tables_document()
    doc["fingerprint"] = cfgmod.tables_fingerprint()
    return doc


HANDLERS: dict[str, Callable] = {
    "gain": cmd_gain, "coverage": cmd_coverage, "radius": cmd_radius, "beamwidths": cmd_beamwidths,
    "map": cmd_map, "rss-pdf": cmd_rss_pdf, "area-pdf": cmd_area_pdf, "mc": cmd_mc,
    "sweep": cmd_sweep, "gradient": cmd_gradient, "pack": cmd_pack, "constants": cmd_constants,
}

TABLE_DEFAULT = {"map", "rss-pdf", "area-pdf", "mc", "sweep"}


# ------------------------------------------------------------------ parser

# flag -> config key; these shadow values from --config
OVERRIDES = {
    "h": "deployment.h_m", "t_dbm": "deployment.t_dbm", "f_ghz": "deployment.f_ghz",
    "pl_max": "deployment.pl_max_db", "sigma_l": "deployment.sigma_l_db", "sigma_n": "deployment.sigma_n_db",
    "epsilon": "deployment.epsilon", "env": "deployment.environment",
    "b_phi": "antenna.b_phi_deg", "b_theta": "antenna.b_theta_deg",
    "lambda_phi": "antenna.lambda_phi", "lambda_theta": "antenna.lambda_theta",
    "tilt": "antenna.tilt_deg", "theta_a": "antenna.theta_a_deg", "a_max": "antenna.a_max_db",
    "t_sigma": "channel.t_sigma", "seed": "sim.seed", "n_samples": "sim.n_samples", "mode": "sim.mode",
    "format": "output.format", "out": "output.path",
}
# options that never enter the provenance record
RUNTIME = {"config", "threads", "command", "out", "format"}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="JSON, key=value file, or a previous artifact")
    g.add_argument("--out", help="output path (default stdout)")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--threads", type=int, help="worker cap (default AIRCOV_THREADS or all cores)")
    g.add_argument("--h", type=float, help="UAV height, m")
    g.add_argument("--b", type=float, help="symmetric beamwidth, deg (sets both axes)")
    g.add_argument("--b-phi", type=float)
    g.add_argument("--b-theta", type=float)
    g.add_argument("--t-dbm", type=float)
    g.add_argument("--f-ghz", type=float)
    g.add_argument("--pl-max", type=float)
    g.add_argument("--sigma-l", type=float)
    g.add_argument("--sigma-n", type=float)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--env", choices=sorted(ENVIRONMENTS))
    g.add_argument("--tilt", type=float)
    g.add_argument("--theta-a", type=float)
    g.add_argument("--lambda-phi", type=float)
    g.add_argument("--lambda-theta", type=float)
    g.add_argument("--a-max", type=float)
    g.add_argument("--t-sigma", type=float, help="override the shadowing std slope")
    g.add_argument("--seed", type=int)
    g.add_argument("--n", dest="n_samples", type=int, help="Monte Carlo sample count")
    g.add_argument("--mode", choices=("mixture", "weighted_sum"))
    return p


COMMON_DESTS = {a.dest for a in _common()._actions} | {"b"}


def _s_args(p):
    p.add_argument("--s-min", type=float, default=-140.0)
    p.add_argument("--s-max", type=float, default=-20.0)
    p.add_argument("--s-step", type=float, default=0.25)


def _b_grid(p, lo=1.0, hi=179.0, step=1.0):
    p.add_argument("--b-min", type=float, default=lo)
    p.add_argument("--b-max", type=float, default=hi)
    p.add_argument("--b-step", type=float, default=step)


def _h_grid(p, lo=100.0, hi=25000.0, step=100.0):
    p.add_argument("--h-min", type=float, default=lo)
    p.add_argument("--h-max", type=float, default=hi)
    p.add_argument("--h-step", type=float, default=step)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = Parser(prog="aircov", description="UAV coverage planning toolkit")
    ap.add_argument("--version", action="version", version=f"aircov {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("gain", parents=[common], help="antenna gain")
    p.add_argument("--r", type=float, help="ground distance (circular form)")
    p.add_argument("--phi-ms", type=float)
    p.add_argument("--theta-ms", type=float)

    p = sub.add_parser("coverage", parents=[common], help="coverage probability at a point")
    p.add_argument("--r", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)

    sub.add_parser("radius", parents=[common], help="coverage radius")

    p = sub.add_parser("beamwidths", parents=[common], help="beamwidths achieving a radius")
    p.add_argument("--r-target", type=float, required=True)

    p = sub.add_parser("map", parents=[common], help="coverage map CSV")
    p.add_argument("--half-side", type=float, default=10000.0)
    p.add_argument("--step", type=float, default=250.0)
    for k in ("x-min", "x-max", "y-min", "y-max"):
        p.add_argument(f"--{k}", type=float)

    p = sub.add_parser("rss-pdf", parents=[common], help="point RSS density")
    p.add_argument("--r", type=float, required=True)
    _s_args(p)

    p = sub.add_parser("area-pdf", parents=[common], help="area RSS density")
    p.add_argument("--side", type=float, default=8000.0)
    p.add_argument("--n-cells", type=int, default=200)
    _s_args(p)

    p = sub.add_parser("mc", help="Monte Carlo validation")
    msub = p.add_subparsers(dest="mc_command", metavar="mc_command", required=True)
    q = msub.add_parser("coverage", parents=[common])
    q.add_argument("--r", type=float, required=True)
    q = msub.add_parser("pdf", parents=[common])
    q.add_argument("--r", type=float)
    q.add_argument("--side", type=float)
    q.add_argument("--bins", type=int, default=50)
    q.add_argument("--lo", type=float)
    q.add_argument("--hi", type=float)

    p = sub.add_parser("sweep", help="trade-off sweeps")
    ssub = p.add_subparsers(dest="family", metavar="family", required=True)
    q = ssub.add_parser("radius-beamwidth", parents=[common])
    q.add_argument("--heights", default="1000,3000,5000,7000")
    _b_grid(q)
    q = ssub.add_parser("radius-height", parents=[common])
    q.add_argument("--beamwidths", default="5,15,50,100")
    _h_grid(q, 250.0, 20000.0, 250.0)
    q = ssub.add_parser("beamwidth-height", parents=[common])
    q.add_argument("--radii", default="4000")
    _h_grid(q, 1000.0, 15000.0, 500.0)
    q = ssub.add_parser("freq-env", parents=[common])
    q.add_argument("--freqs", default="2.0,3.5,5.5")
    q.add_argument("--envs")
    q.add_argument("--sweep-h", type=float, default=3000.0)
    q.add_argument("--sweep-pl-max", type=float, default=120.0)
    _b_grid(q)

    p = sub.add_parser("gradient", parents=[common], help="finite-difference sensitivity")
    p.add_argument("--wrt", choices=("beamwidth", "height"), default="beamwidth")
    p.add_argument("--heights", default="1000,3000,5000,7000")
    p.add_argument("--beamwidths", default="5,15,50,100")
    p.add_argument("--summary", action="store_true", help="max-gradient summary over the full grid")
    _b_grid(p)
    _h_grid(p)

    p = sub.add_parser("pack", help="multi-UAV planning")
    psub = p.add_subparsers(dest="pack_command", metavar="pack_command", required=True)
    psub.add_parser("table", parents=[common])
    q = psub.add_parser("min-uavs", parents=[common])
    q.add_argument("--rt", type=float, required=True)
    q.add_argument("--c-min", type=float, default=70.0)
    q.add_argument("--scheme", choices=packing.SCHEMES, default="hex")
    q.add_argument("--h-max", type=float, default=5000.0)
    q = psub.add_parser("beamwidth", parents=[common])
    q.add_argument("--uavs", dest="n", type=int, required=True, help="fleet size")
    q.add_argument("--rt", type=float, required=True)
    q.add_argument("--c-min", type=float, default=60.0)
    q.add_argument("--no-shrink", action="store_true", help="use the raw packing radius")
    q = psub.add_parser("altitude", parents=[common])
    q.add_argument("--r-target", type=float)
    q.add_argument("--rt", type=float)
    q.add_argument("--uavs", dest="n", type=int, help="fleet size")
    q.add_argument("--scheme", choices=packing.SCHEMES, default="hex")
    q.add_argument("--h-max", type=float, default=5000.0)
    q = psub.add_parser("sweep", parents=[common])
    q.add_argument("--rt-min", type=float, default=500.0)
    q.add_argument("--rt-max", type=float, default=14000.0)
    q.add_argument("--rt-step", type=float, default=500.0)
    q.add_argument("--c-min", type=float, default=70.0)
    q.add_argument("--scheme", choices=packing.SCHEMES, default="hex")
    q.add_argument("--h-max", type=float, default=5000.0)

    sub.add_parser("constants", parents=[common], help="embedded model tables")

    p = sub.add_parser("replay", help="re-run the command recorded in an artifact")
    p.add_argument("artifact")
    p.add_argument("--out")
    p.add_argument("--threads", type=int)
    return ap


# ------------------------------------------------------------------- run


def resolve_config(ns: argparse.Namespace) -> cfgmod.RunConfig:
    rc = cfgmod.RunConfig()
    if getattr(ns, "config", None):
        rc = cfgmod.apply_overrides(rc, cfgmod.load_file(ns.config))
    flat = {}
    if getattr(ns, "b", None) is not None:
        flat["antenna.b_phi_deg"] = ns.b
        flat["antenna.b_theta_deg"] = ns.b
    for dest, key in OVERRIDES.items():
        v = getattr(ns, dest, None)
        if v is not None:
            flat[key] = v
    return cfgmod.apply_overrides(rc, flat)


def command_path(ns) -> list[str]:
    path = [ns.command]
    for sub in ("mc_command", "family", "pack_command"):
        if getattr(ns, sub, None):
            path.append(getattr(ns, sub))
    return path


def command_args(ns) -> dict:
    skip = COMMON_DESTS | {"command", "mc_command", "family", "pack_command"}
    return {k: v for k, v in sorted(vars(ns).items()) if k not in skip}


def provenance(rc: cfgmod.RunConfig, path: list[str], args: dict, dep) -> dict:
    conf = rc.to_dict()
    conf["output"] = {"format": rc.output.format, "path": None}
    return {
        "tool": "aircov",
        "version": __version__,
        "tables": cfgmod.tables_fingerprint(),
        "command": path,
        "args": args,
        "seed": rc.sim.seed,
        "deployment": tradeoff.deployment_header(dep),
        "config": conf,
    }


def execute(path: list[str], args: dict, rc: cfgmod.RunConfig, threads: Optional[int]) -> tuple[int, str, Any]:
    """Run one command. Returns (status, text, result)."""
    dep = rc.validate()
    ns = argparse.Namespace(**args, threads=threads, command=path[0])
    if len(path) > 1:
        dest = {"mc": "mc_command", "sweep": "family", "pack": "pack_command"}[path[0]]
        setattr(ns, dest, path[1])
    header = provenance(rc, path, args, dep)
    try:
        result = HANDLERS[path[0]](ns, rc, dep)
    except Infeasible as inf:
        body = {"provenance": header, "infeasible": _clean(inf.body)}
        return EXIT_INFEASIBLE, json.dumps(body, sort_keys=True, indent=1, allow_nan=False) + "\n", None
    fmt = rc.output.format or ("csv" if isinstance(result, Table) else "json")
    return EXIT_OK, render(result, fmt, header), result


def _replay(ns) -> tuple[list, dict, cfgmod.RunConfig]:
    with open(ns.artifact, encoding="utf-8") as fh:
        text = fh.read()
    conf = run = None
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        prov = doc.get("provenance", {})
        conf, run = prov.get("config"), prov
    else:
        for line in text.splitlines():
            if line.startswith(cfgmod.CONFIG_PREFIX):
                conf = json.loads(line[len(cfgmod.CONFIG_PREFIX):])
            elif line.startswith(cfgmod.RUN_PREFIX):
                run = json.loads(line[len(cfgmod.RUN_PREFIX):])
    if conf is None or run is None or "command" not in run:
        raise DomainError(f"{ns.artifact}: no provenance header found")
    return run["command"], run["args"], cfgmod.RunConfig.from_dict(conf)


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if argv and not argv[0].startswith("-") and argv[0] not in COMMANDS:
        sys.stderr.write(f"aircov: unknown command {argv[0]!r}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        ns = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"aircov: {exc}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID

    try:
        cfgmod.self_check()
        if ns.command == "replay":
            path, args, rc = _replay(ns)
            out_path = ns.out
        else:
            rc = resolve_config(ns)
            path, args = command_path(ns), command_args(ns)
            out_path = rc.output.path
        threads = ns.threads if ns.threads is not None else default_threads()
        if threads < 1:
            raise DomainError("--threads must be >= 1")
        status, text, result = execute(path, args, rc, threads)
    except (DomainError, UnsupportedError, json.JSONDecodeError, OSError) as exc:
        sys.stderr.write(f"aircov: error: {exc}\n")
        return EXIT_INVALID
    except (SingularityError, UnboundedRadiusError, ArithmeticError, FloatingPointError) as exc:
        sys.stderr.write(f"aircov: numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except AircovError as exc:
        sys.stderr.write(f"aircov: error: {exc}\n")
        return EXIT_INVALID

    if status == EXIT_INFEASIBLE:
        sys.stdout.write(text)
        return status
    write_output(text, out_path)
    manifest = getattr(result, "manifest", None)
    if manifest is not None and out_path:
        with open(os.path.splitext(out_path)[0] + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(_clean(manifest), sort_keys=True, indent=1, allow_nan=False) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
