"""Scenario configuration files: flat TOML key/value tables with a checked schema.

Every scenario accepts ``seed``; the remaining keys are listed in ``SCHEMAS``.
A grid value may be a list of numbers or a ``{start, stop, num}`` table
(inclusive linear spacing).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError

SCENARIOS = ("dephasing", "wigner", "blp", "oneoverf", "knill", "sweep", "validate")


@dataclass(frozen=True)
class Key:
    kind: str  # int, float, str, bool, floats, ints
    default: Any = None
    check: Optional[Callable[[Any], bool]] = None
    rule: str = ""
    choices: tuple = ()


def _pos(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _all(pred):
    return lambda xs: all(pred(x) for x in xs)


_CODE = {
    "code": Key("str", "binomial", choices=("binomial", "cat")),
    "N": Key("int", 2, lambda x: x >= 1, ">= 1"),
    "K": Key("int", 2, lambda x: x >= 1, ">= 1"),
    "alpha": Key("float", 2.0, _pos, "> 0"),
    "d": Key("int", None, lambda x: x >= 2, ">= 2"),
}

SCHEMAS: Dict[str, Dict[str, Key]] = {
    "dephasing": {
        "a": Key("floats", [1.0, 2.0, 3.0]),
        "r": Key("floats", [0.1, 1.0, 10.0], _all(_pos), "all > 0"),
        "tau": Key("floats", [0.5, 1.0, 2.0, 5.0], _all(_nonneg), "all >= 0"),
        "samples": Key("int", 100_000, lambda x: x >= 1000, ">= 1000"),
    },
    "wigner": {
        "state": Key("str", "binomial", choices=("fock", "coherent", "binomial", "cat")),
        "n": Key("int", 1, _nonneg, ">= 0"),
        **_CODE,
        "r": Key("float", 0.1, _pos, "> 0"),
        "tau": Key("floats", [0.0, 0.5, 1.0], _all(_nonneg), "all >= 0"),
        "ring_radius": Key("float", 1.2, _nonneg, ">= 0"),
        "extent": Key("float", 6.0, _pos, "> 0"),
        "points": Key("int", 241, lambda x: x >= 11, ">= 11"),
    },
    "blp": {
        "pair": Key("str", "fock", choices=("fock", "coherent", "cat", "binomial")),
        "l": Key("int", 1, lambda x: x >= 1, ">= 1"),
        **_CODE,
        "r": Key("floats", [0.1], _all(_pos), "all > 0"),
        "horizon": Key("float", 200.0, _pos, "> 0"),
        "step": Key("float", 0.01, _pos, "> 0"),
    },
    "oneoverf": {
        "alpha": Key("float", 3.0, _pos, "> 0"),
        "d": Key("int", 32, lambda x: x >= 2, ">= 2"),
        "n_f": Key("ints", list(range(1, 16)), _all(lambda x: x >= 1), "all >= 1"),
        "r_min": Key("float", 1e-4, _pos, "> 0"),
        "r_max": Key("float", 1e4, _pos, "> 0"),
        "coupling_normalized": Key("bool", False),
        "horizon": Key("float", 20.0, _pos, "> 0"),
        "step": Key("float", 0.005, _pos, "> 0"),
    },
    "knill": {
        **_CODE,
        "noise": Key("str", "rtn", choices=("none", "rtn", "oneoverf")),
        "r": Key("float", 0.1, _pos, "> 0"),
        "n_f": Key("int", 10, lambda x: x >= 1, ">= 1"),
        "r_min": Key("float", 1e-4, _pos, "> 0"),
        "r_max": Key("float", 1e4, _pos, "> 0"),
        "kappa": Key("float", 0.0, _nonneg, ">= 0"),
        "tau": Key("floats", [0.5, 1.0], _all(_nonneg), "all >= 0"),
        "n_bins": Key("int", 256, lambda x: x >= 64, ">= 64"),
    },
    "sweep": {
        "r": Key("float", 0.1, _pos, "> 0"),
        "alpha0": Key("floats", [0.5, 1.0, 1.5, 2.0, 2.5], _all(_nonneg), "all >= 0"),
        "d": Key("int", 40, lambda x: x >= 2, ">= 2"),
        "horizon": Key("float", 100.0, _pos, "> 0"),
        "step": Key("float", 0.01, _pos, "> 0"),
    },
    "validate": {
        "samples": Key("int", 100_000, lambda x: x >= 1000, ">= 1000"),
    },
}


def _coerce(name: str, key: Key, value: Any) -> Any:
    def fail(msg):
        raise ConfigError(f"field '{name}': {msg} (got {value!r})")

    if key.kind in ("floats", "ints"):
        if isinstance(value, Mapping):
            missing = {"start", "stop", "num"} - set(value)
            if missing or set(value) - {"start", "stop", "num"}:
                fail("grid table needs exactly start, stop and num")
            if not isinstance(value["num"], int) or value["num"] < 1:
                fail("grid num must be a positive integer")
            value = np.linspace(float(value["start"]), float(value["stop"]), value["num"]).tolist()
        elif isinstance(value, (int, float)) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, list) or not value:
            fail("expected a non-empty list or a {start, stop, num} table")
        scalar = "int" if key.kind == "ints" else "float"
        out = [_coerce(name, Key(scalar), v) for v in value]
    elif key.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            fail("expected an integer")
        out = value
    elif key.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            fail("expected a number")
        out = float(value)
        if not np.isfinite(out):
            fail("expected a finite number")
    elif key.kind == "bool":
        if not isinstance(value, bool):
            fail("expected true or false")
        out = value
    else:
        if not isinstance(value, str):
            fail("expected a string")
        if key.choices and value not in key.choices:
            fail(f"expected one of {', '.join(key.choices)}")
        out = value
    if key.check is not None and not key.check(out):
        fail(f"must be {key.rule}")
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: Dict[str, Any]
    seed: int = 0

    def __getitem__(self, name: str) -> Any:
        return self.params[name]

    def digest(self) -> str:
        blob = json.dumps({"scenario": self.scenario, "seed": self.seed, **self.params},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def build_config(scenario: str, raw: Mapping[str, Any], seed: Optional[int] = None) -> ScenarioConfig:
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario '{scenario}'; expected one of {', '.join(SCENARIOS)}")
    raw = dict(raw)
    declared = raw.pop("scenario", scenario)
    if declared != scenario:
        raise ConfigError(f"field 'scenario': file declares '{declared}' but '{scenario}' was requested")
    file_seed = raw.pop("seed", 0)
    if isinstance(file_seed, bool) or not isinstance(file_seed, int) or file_seed < 0:
        raise ConfigError(f"field 'seed': expected a non-negative integer (got {file_seed!r})")
    schema = SCHEMAS[scenario]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown field(s) for '{scenario}': {', '.join(unknown)}")
    params = {}
    for name, key in schema.items():
        params[name] = _coerce(name, key, raw[name]) if name in raw else key.default
    if "r_min" in params and params["r_min"] >= params["r_max"]:
        raise ConfigError("field 'r_min': must be below r_max")
    return ScenarioConfig(scenario, params, file_seed if seed is None else seed)


def load_config(path: Path, scenario: str, seed: Optional[int] = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return build_config(scenario, raw, seed)
