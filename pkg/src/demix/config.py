"""Sweep configuration: TOML file <-> ``SweepConfig``."""
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, replace

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .amp_core import DEFAULT_MAX_ITER, DEFAULT_TOL, PRIOR_BRIDGES
from .channel import ebn0_to_amplitude
from .model import GroupConfig
from .outer_code import PRESETS, preset

RECEIVER_NAMES = ("jd", "tin", "sic")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    preset: str
    K: int
    w: int = None
    L: int = None
    v: int = None
    amplitude: float = None  # overrides the Eb/N0 mapping when set


@dataclass(frozen=True)
class SweepConfig:
    groups: tuple
    n: int = 38400
    ebn0_db: tuple = (1.8, 2.0, 2.2, 2.4, 2.6, 2.8)
    receivers: tuple = RECEIVER_NAMES
    trials: int = 100
    master_seed: int = 0
    sigma2: float = 1.0
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    prior_bridge: str = "occupancy"
    list_source: str = "estimate"
    beam_width: int = None
    list_size: int = None
    workers: int = 1
    out: str = None

    def __post_init__(self):
        validate(self)

    def replace(self, **kw):
        return replace(self, **kw)

    def graphs(self):
        return [preset(g.preset) for g in self.groups]

    def group_configs(self, ebn0_db, graphs=None):
        graphs = graphs or self.graphs()
        sig = self.sigma2 if self.sigma2 > 0 else 1.0
        out = []
        for spec, g in zip(self.groups, graphs):
            d = spec.amplitude if spec.amplitude is not None else ebn0_to_amplitude(ebn0_db, g.w, g.L, sig)
            out.append(GroupConfig(graph=g, K=spec.K, amplitude=d))
        return out

    def semantic_dict(self):
        d = asdict(self)
        d.pop("workers")
        d.pop("out")
        return d

    def config_hash(self):
        blob = json.dumps(self.semantic_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def validate(cfg):
    if not cfg.groups:
        raise ConfigError("at least one [[group]] is required")
    for i, g in enumerate(cfg.groups, 1):
        if g.preset not in PRESETS:
            raise ConfigError(f"group {i}: unknown preset {g.preset!r}")
        p = PRESETS[g.preset]
        for key in ("w", "L", "v"):
            val = getattr(g, key)
            if val is not None and val != p[key]:
                raise ConfigError(f"group {i}: {key}={val} does not match preset {g.preset} ({p[key]})")
        if g.K < 0:
            raise ConfigError(f"group {i}: K must be >= 0")
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.sigma2 < 0:
        raise ConfigError("sigma2 must be >= 0")
    if cfg.n < 1:
        raise ConfigError("n must be positive")
    bad = set(cfg.receivers) - set(RECEIVER_NAMES)
    if bad or not cfg.receivers:
        raise ConfigError(f"receivers must be drawn from {RECEIVER_NAMES}")
    if cfg.prior_bridge not in PRIOR_BRIDGES:
        raise ConfigError(f"prior_bridge must be one of {PRIOR_BRIDGES}")
    if cfg.list_source not in ("estimate", "beliefs"):
        raise ConfigError("list_source must be 'estimate' or 'beliefs'")
    if not cfg.ebn0_db:
        raise ConfigError("ebn0_db list is empty")


def from_dict(raw):
    raw = dict(raw)
    amp = raw.pop("amp", {})
    decoder = raw.pop("decoder", {})
    groups = raw.pop("group", None)
    if not groups:
        raise ConfigError("config needs [[group]] sections")
    try:
        specs = tuple(GroupSpec(**g) for g in groups)
        kw = dict(raw)
        kw.update({k: amp[k] for k in ("max_iter", "tol", "prior_bridge") if k in amp})
        kw.update({k: decoder[k] for k in ("beam_width", "list_size", "list_source") if k in decoder})
        for key in ("ebn0_db", "receivers"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return SweepConfig(groups=specs, **kw)
    except TypeError as e:
        raise ConfigError(str(e)) from None


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return from_dict(raw)
