"""Run configuration: loading, override resolution, serialization.

Accepted file forms:

* a JSON document with optional ``deployment``/``antenna``/``channel``/
  ``sim``/``output`` blocks;
* line-oriented ``key = value`` text, keys either dotted (``antenna.tilt_deg``)
  or bare when unambiguous (``tilt_deg``), ``#`` starting a comment;
* any artifact written by the CLI, whose ``# config: {...}`` header line
  carries the resolved configuration.

Floats are written with ``repr`` so every value round-trips bit-exactly.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Optional

from . import packing
from .antenna import AntennaPattern
from .channel import ENVIRONMENTS, SHADOWING_TABLE, Environment, ShadowingParams, get_environment, shadowing_for_frequency
from .coverage import DEFAULT_SIGMA_L, DEFAULT_SIGMA_N, Deployment
from .errors import DomainError
from .montecarlo import SimConfig

CONFIG_PREFIX = "# config: "
RUN_PREFIX = "# run: "


@dataclass
class DeploymentBlock:
    h_m: float = 1000.0
    t_dbm: float = 40.0
    f_ghz: float = 2.0
    pl_max_db: float = 115.0
    sigma_l_db: float = DEFAULT_SIGMA_L
    sigma_n_db: float = DEFAULT_SIGMA_N
    epsilon: float = 0.8
    environment: str = "suburban"


@dataclass
class AntennaBlock:
    b_phi_deg: float = 50.0
    b_theta_deg: float = 50.0
    lambda_phi: float = 0.5
    lambda_theta: float = 0.5
    tilt_deg: float = 0.0
    theta_a_deg: float = 0.0
    a_max_db: float = 20.0


@dataclass
class ChannelBlock:
    """Optional overrides of the built-in tables; ``None`` means table value."""

    env_j: Optional[float] = None
    env_k: Optional[float] = None
    env_l: Optional[float] = None
    env_m: Optional[float] = None
    env_n: Optional[float] = None
    p_mu: Optional[float] = None
    q_mu: Optional[float] = None
    t_mu: Optional[float] = None
    p_sigma: Optional[float] = None
    q_sigma: Optional[float] = None
    t_sigma: Optional[float] = None
    interpolate_frequency: bool = False


@dataclass
class SimBlock:
    seed: int = 0
    n_samples: int = 100_000
    mode: str = "mixture"


@dataclass
class OutputBlock:
    format: Optional[str] = None
    path: Optional[str] = None


BLOCKS = {
    "deployment": DeploymentBlock,
    "antenna": AntennaBlock,
    "channel": ChannelBlock,
    "sim": SimBlock,
    "output": OutputBlock,
}


@dataclass
class RunConfig:
    deployment: DeploymentBlock = field(default_factory=DeploymentBlock)
    antenna: AntennaBlock = field(default_factory=AntennaBlock)
    channel: ChannelBlock = field(default_factory=ChannelBlock)
    sim: SimBlock = field(default_factory=SimBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        cfg = cls()
        return apply_overrides(cfg, flatten(doc))

    def build_deployment(self) -> Deployment:
        d, a, c = self.deployment, self.antenna, self.channel
        env = get_environment(d.environment)
        env_over = {k[4:]: v for k, v in asdict(c).items() if k.startswith("env_") and v is not None}
        if env_over:
            env = replace(env, **env_over)
        sh_keys = ("p_mu", "q_mu", "t_mu", "p_sigma", "q_sigma", "t_sigma")
        sh_over = {k: getattr(c, k) for k in sh_keys if getattr(c, k) is not None}
        if sh_over:
            base = shadowing_for_frequency(d.f_ghz, interpolate=c.interpolate_frequency)
            vals = {k: getattr(base, k) for k in sh_keys}
            vals.update(sh_over)
            shadow = ShadowingParams(base.frequency, **vals)
        else:
            shadow = shadowing_for_frequency(d.f_ghz, interpolate=c.interpolate_frequency)
        antenna = AntennaPattern(
            b_phi=a.b_phi_deg, b_theta=a.b_theta_deg,
            lambda_phi=a.lambda_phi, lambda_theta=a.lambda_theta,
            phi_tilt=a.tilt_deg, theta_a=a.theta_a_deg, a_max=a.a_max_db,
        )
        return Deployment(
            h=d.h_m, t_dbm=d.t_dbm, f_ghz=d.f_ghz, pl_max=d.pl_max_db,
            sigma_l=d.sigma_l_db, sigma_n=d.sigma_n_db, epsilon=d.epsilon,
            env=env, shadow=shadow, antenna=antenna,
        )

    def build_sim(self) -> SimConfig:
        s = self.sim
        return SimConfig(seed=s.seed, n_samples=s.n_samples, mode=s.mode)

    def validate(self) -> Deployment:
        """Build every module object once so bad values fail before any work."""
        if self.output.format not in (None, "csv", "json"):
            raise DomainError("output format must be csv or json")
        self.build_sim()
        return self.build_deployment()


# ------------------------------------------------------------- key handling


def _field_types() -> dict[str, dict[str, Any]]:
    return {b: {f.name: f.type for f in fields(cls)} for b, cls in BLOCKS.items()}


def resolve_key(key: str) -> tuple[str, str]:
    """Map a dotted or bare key to (block, field)."""
    types = _field_types()
    if "." in key:
        block, name = key.split(".", 1)
        if block not in types or name not in types[block]:
            raise DomainError(f"unknown config key {key!r}")
        return block, name
    hits = [(b, key) for b, names in types.items() if key in names]
    if len(hits) != 1:
        raise DomainError(f"unknown or ambiguous config key {key!r}")
    return hits[0]


def flatten(doc: dict) -> dict[str, Any]:
    out = {}
    for k, v in doc.items():
        if isinstance(v, dict):
            for kk, vv in v.items():
                out[f"{k}.{kk}"] = vv
        else:
            out[k] = v
    return out


def _coerce(block: str, name: str, value: Any) -> Any:
    typ = _field_types()[block][name]
    if value is None:
        if "Optional" in str(typ):
            return None
        raise DomainError(f"{block}.{name} may not be null")
    if "bool" in str(typ):
        if isinstance(value, bool):
            return value
        if str(value).lower() in ("true", "1", "yes"):
            return True
        if str(value).lower() in ("false", "0", "no"):
            return False
        raise DomainError(f"{block}.{name} expects a boolean")
    if "int" in str(typ):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        try:
            return int(value)
        except (TypeError, ValueError):
            raise DomainError(f"{block}.{name} expects an integer") from None
    if "float" in str(typ):
        try:
            v = float(value)
        except (TypeError, ValueError):
            raise DomainError(f"{block}.{name} expects a number") from None
        if not math.isfinite(v):
            raise DomainError(f"{block}.{name} must be finite")
        return v
    return str(value)


def apply_overrides(cfg: RunConfig, flat: dict[str, Any]) -> RunConfig:
    """New config with ``flat`` (dotted or bare keys) applied on top of ``cfg``."""
    cfg = RunConfig(**{b: replace(getattr(cfg, b)) for b in BLOCKS})
    for key, value in flat.items():
        block, name = resolve_key(key)
        setattr(getattr(cfg, block), name, _coerce(block, name, value))
    return cfg


# ------------------------------------------------------------ (de)serialize


def _parse_scalar(text: str) -> Any:
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_kv(text: str) -> dict[str, Any]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"line {lineno}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip()] = _parse_scalar(v)
    return out


def loads(text: str) -> dict[str, Any]:
    """Flat key/value mapping from any accepted config text."""
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            return flatten(json.loads(line[len(CONFIG_PREFIX):]))
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        if "config" in doc and isinstance(doc["config"], dict):
            doc = doc["config"]
        return flatten(doc)
    return parse_kv(text)


def load_file(path: str) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def dumps_kv(doc: dict) -> str:
    lines = [f"{k} = {json.dumps(v, allow_nan=False)}" for k, v in flatten(doc).items()]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------- built-in tables


def tables_document() -> dict:
    """Every embedded model constant as a nested document."""
    return {
        "environments": {
            name: {"j": e.j, "k": e.k, "l": e.l, "m": e.m, "n": e.n} for name, e in ENVIRONMENTS.items()
        },
        "shadowing": {
            repr(f): {k: getattr(s, k) for k in ("p_mu", "q_mu", "t_mu", "p_sigma", "q_sigma", "t_sigma")}
            for f, s in SHADOWING_TABLE.items()
        },
        "packing": {
            str(e.n): {
                "r_ratio_circle": e.r_ratio_circle, "r_ratio_hex": e.r_ratio_hex,
                "c_circle": e.c_circle, "c_hex": e.c_hex,
            }
            for e in packing.PACKING_TABLE
        },
    }


def tables_fingerprint() -> str:
    return hashlib.sha256(dumps_json(tables_document()).encode()).hexdigest()[:16]


def self_check() -> None:
    """Sanity of the embedded tables; raises ``AssertionError`` on corruption."""
    for env in ENVIRONMENTS.values():
        assert env.m > 0 and env.n > 0, env
    assert ENVIRONMENTS["suburban"] == Environment("suburban", 101.6, 0.0, 0.0, 3.25, 1.241)
    assert ENVIRONMENTS["highrise_urban"] == Environment("highrise_urban", 352.0, -1.37, -53.0, 173.8, 4.670)
    assert SHADOWING_TABLE[2.0].pole_free and SHADOWING_TABLE[3.5].pole_free
    tab = packing.PACKING_TABLE
    assert [e.n for e in tab] == list(range(1, packing.N_MAX + 1))
    assert tab[0][1:] == (1.0, 1.0, 100.0, 100.0)
    assert min(e.c_hex for e in tab) >= 69.0
    assert min(e.c_circle for e in tab) == 50.0
    assert packing.hex_coverage_n3() == tab[2].c_hex
    for e in tab:
        assert 0 < e.r_ratio_circle <= 1 and 0 < e.r_ratio_hex <= 1
