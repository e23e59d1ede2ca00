"""Plain-text experiment configuration.

One ``key = value`` per line, ``#`` starts a comment, blank lines are
ignored.  Keys are fixed (see ``KEYS``); an unknown or repeated key is a parse
error.  Example::

    # Smith family on the geometric law
    model.family  = smith
    model.symbols = geometric(0.5)
    levels        = 1..6
    n_samples     = 100000
    seed          = 7

Value syntax:

``model.symbols``   ``geometric(rho)``, a probability list ``0.5, 0.3, 0.2``
                    (symbols 1, 2, ...), or ``symbol:prob`` pairs ``1:0.5, 3:0.5``
``model.blocks.A``  length pmf of symbol ``A`` for the table family, ``1:0.5, 2:0.5``
integer lists       ``1..6`` or ``1, 2, 5``
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import RegenError
from .model import Geometric, ModelSpec, finite
from .model import block as block_model
from .model import iid as iid_model
from .model import smith as smith_model
from .model import table as table_model


class ConfigError(ValueError):
    """Malformed configuration text (exit status 2)."""


class PreconditionError(ValueError):
    """Well-formed configuration violating a precondition (exit status 3)."""


KEYS = {
    "model.family": "str",
    "model.symbols": "str",
    "model.truncate": "int",
    "levels": "ints",
    "symbol": "int",
    "lengths": "ints",
    "q": "ints",
    "k_max": "int",
    "n_max": "int",
    "horizon": "int",
    "start": "str",
    "n_samples": "int",
    "n_replicas": "int",
    "seed": "int",
    "workers": "int",
    "oracle.budget": "int",
    "oracle.k_max": "int",
    "oracle.max_symbol": "int",
    "tolerance.sigma": "float",
    "output": "str",
}
_BLOCK_KEY = re.compile(r"^model\.blocks\.(\d+)$")


@dataclass
class ExperimentConfig:
    family: str = "smith"
    symbols: str = "geometric(0.5)"
    truncate: int | None = None
    blocks: dict = field(default_factory=dict)
    levels: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    symbol: int | None = None
    lengths: list = field(default_factory=list)
    q: list = field(default_factory=lambda: [1])
    k_max: int = 20
    n_max: int = 50
    horizon: int = 1000
    start: str = "stationary"
    n_samples: int = 0
    n_replicas: int = 0
    seed: int = 0
    workers: int = 1
    oracle_budget: int = 50_000_000
    oracle_k_max: int = 200
    oracle_max_symbol: int | None = None
    sigma: float = 4.0
    output: str | None = None
    raw: dict = field(default_factory=dict)

    def model(self) -> ModelSpec:
        try:
            law = parse_symbol_law(self.symbols)
            if self.family == "table":
                m = table_model(law, self.blocks)
            else:
                builders = {"smith": smith_model, "iid": iid_model, "block": block_model}
                if self.family not in builders:
                    raise PreconditionError(f"unknown model.family {self.family!r}")
                m = builders[self.family](law)
            if self.truncate is not None:
                m = m.truncate(self.truncate)
            return m
        except RegenError as err:
            raise PreconditionError(str(err)) from err


def parse_int_list(text: str) -> list[int]:
    text = text.strip()
    m = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        return list(range(lo, hi + 1))
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise ConfigError(f"bad integer list {text!r}") from err


def _pairs(text: str) -> dict:
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        k, sep, v = item.partition(":")
        if not sep:
            raise ConfigError(f"expected key:value pairs, got {item!r}")
        try:
            out[int(k)] = float(v)
        except ValueError as err:
            raise ConfigError(f"bad pair {item!r}") from err
    return out


def parse_symbol_law(text: str):
    text = text.strip()
    m = re.fullmatch(r"geometric\(\s*([0-9.eE+-]+)\s*\)", text)
    try:
        if m:
            return Geometric(float(m.group(1)))
        if ":" in text:
            return finite(_pairs(text))
        return finite([float(v) for v in text.split(",") if v.strip()])
    except RegenError as err:
        raise PreconditionError(str(err)) from err
    except ValueError as err:
        raise ConfigError(f"cannot read symbol law {text!r}") from err


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    seen = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key in seen:
            raise ConfigError(f"line {lineno}: repeated key {key!r}")
        seen[key] = value
        bm = _BLOCK_KEY.match(key)
        if bm:
            cfg.blocks[int(bm.group(1))] = _pairs(value)
            continue
        kind = KEYS.get(key)
        if kind is None:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            parsed = {"str": str, "int": int, "float": float, "ints": parse_int_list}[kind](value)
        except ValueError as err:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from err
        attr = {"model.family": "family", "model.symbols": "symbols", "model.truncate": "truncate",
                "oracle.budget": "oracle_budget", "oracle.k_max": "oracle_k_max",
                "oracle.max_symbol": "oracle_max_symbol", "tolerance.sigma": "sigma"}.get(key, key)
        setattr(cfg, attr, parsed)
    cfg.raw = seen
    _check(cfg)
    return cfg


def _check(cfg: ExperimentConfig):
    if cfg.start not in ("stationary", "from_regeneration"):
        raise PreconditionError(f"start must be stationary or from_regeneration, got {cfg.start!r}")
    for name in ("n_samples", "n_replicas", "horizon", "seed", "n_max"):
        if getattr(cfg, name) < 0:
            raise PreconditionError(f"{name} must be non-negative")
    if cfg.workers < 1:
        raise PreconditionError("workers must be at least 1")
    if cfg.seed >= 2**64:
        raise PreconditionError("seed must fit in 64 bits")
    if any(v < 1 for v in cfg.q):
        raise PreconditionError("q values must be at least 1")
    if any(v < 1 for v in cfg.lengths):
        raise PreconditionError("lengths must be positive")
    if cfg.k_max < 1 or cfg.oracle_k_max < 1:
        raise PreconditionError("k_max values must be positive")
    if 0 < cfg.n_replicas < 100:
        raise PreconditionError("n_replicas must be 0 or at least 100")
    cfg.model()  # validates the model definition


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from err
    return parse_config(text)
