"""Flat ``key=value`` experiment configs, their canonical text and its FNV-1a hash.

Matrix values are written row by row, either ``Q=1,0.5;0.5,1`` on one line or
as repeated ``Q=...`` lines, one per row. Command-line flags ``--key=value``
override file values; a flag replaces a whole matrix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

EXPERIMENTS = (
    "contraction",
    "lsi-decay",
    "entropy-identity",
    "entropic-optimality",
    "mf-fixed-point",
    "jko-consistency",
    "row-sum-reduction",
    "chaos-scaling",
    "proximity-bounds",
    "symmetry-checks",
)

FAMILIES = ("mean-field", "ring", "star", "complete")

# key -> kind
SCHEMA = {
    "experiment": "str",
    "seed": "seed",
    "output_dir": "str",
    "dt": "float",
    "m": "int",
    "m_limit": "int",
    "T": "float",
    "n": "int",
    "d": "int",
    "tau": "floats",
    "grid": "grid",
    "Q": "matrix",
    "l": "floats",
    "A": "matrix",
    "family": "str",
    "ns": "ints",
    "eps": "floats",
    "cases": "int",
    "sweeps": "int",
    "mu0_mean": "floats",
    "mu0_var": "float",
    "pooled": "bool",
    "record_every": "int",
    "replicates": "int",
}

DEFAULTS = {"dt": 1e-3, "m": 10_000, "grid": (-8.0, 8.0, 512), "seed": 42}

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (usage error)."""


def _kind(key: str) -> Optional[str]:
    if key.startswith("tol_"):
        return "float"
    return SCHEMA.get(key)


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def _parse_int(text: str) -> int:
    try:
        val = float(text)
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None
    if not val.is_integer():
        raise ConfigError(f"not an integer: {text!r}")
    return int(val)


def _row(text: str) -> list:
    parts = [p.strip() for p in text.split(",")]
    if not parts or any(p == "" for p in parts):
        raise ConfigError(f"empty entry in {text!r}")
    return [_parse_float(p) for p in parts]


def _parse_value(key: str, text: str):
    kind = _kind(key)
    if kind is None:
        raise ConfigError(f"unknown key {key!r}")
    text = text.strip()
    if kind == "str":
        if not text:
            raise ConfigError(f"empty value for {key!r}")
        return text
    if kind == "seed":
        val = _parse_int(text)
        if not 0 <= val < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        return val
    if kind == "int":
        return _parse_int(text)
    if kind == "float":
        return _parse_float(text)
    if kind == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {text!r}")
    if kind == "floats":
        return tuple(_row(text))
    if kind == "ints":
        return tuple(_parse_int(p) for p in text.split(","))
    if kind == "grid":
        vals = _row(text)
        if len(vals) != 3 or not float(vals[2]).is_integer():
            raise ConfigError("grid must be lo,hi,npoints")
        return (vals[0], vals[1], int(vals[2]))
    if kind == "matrix":
        return [tuple(_row(r)) for r in text.split(";")]
    raise AssertionError(kind)


@dataclass
class ExperimentConfig:
    experiment: Optional[str]
    seed: int = 42
    overrides: dict = field(default_factory=dict)
    output_dir: Optional[str] = None

    def get(self, key: str, default=None):
        return self.overrides.get(key, default)

    def get_float(self, key: str, default: float) -> float:
        return float(self.overrides.get(key, default))

    def get_int(self, key: str, default: int) -> int:
        return int(self.overrides.get(key, default))

    def matrix(self, key: str, default) -> np.ndarray:
        val = self.overrides.get(key)
        return np.array(default if val is None else val, dtype=float)

    def vector(self, key: str, default) -> np.ndarray:
        val = self.overrides.get(key)
        return np.array(default if val is None else val, dtype=float)

    def tol(self, name: str, default: float) -> float:
        return float(self.overrides.get("tol_" + name, default))

    @property
    def kappa(self) -> Optional[float]:
        """Concavity modulus of the configured ``Q``, when one is given."""
        if "Q" not in self.overrides:
            return None
        return float(np.linalg.eigvalsh(self.matrix("Q", None))[0])

    def canonical_text(self) -> str:
        lines = [f"experiment={self.experiment}", f"seed={self.seed}"]
        for key in sorted(self.overrides):
            lines.append(f"{key}={_canonical_value(self.overrides[key])}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return f"{fnv1a_64(self.canonical_text().encode('utf-8')):016x}"

    def echo(self) -> dict:
        out = {"experiment": self.experiment, "seed": self.seed, "output_dir": self.output_dir}
        for key in sorted(self.overrides):
            val = self.overrides[key]
            out[key] = [list(r) for r in val] if isinstance(val, list) else (list(val) if isinstance(val, tuple) else val)
        return out


def _canonical_value(val) -> str:
    if isinstance(val, bool):
        return "1" if val else "0"
    if isinstance(val, float):
        return format(val, ".17g")
    if isinstance(val, int):
        return str(val)
    if isinstance(val, list):
        return ";".join(_canonical_value(tuple(r)) for r in val)
    if isinstance(val, tuple):
        return ",".join(_canonical_value(v) for v in val)
    return str(val)


def fnv1a_64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def _parse_lines(lines: Iterable[str], source: str) -> dict:
    values: dict = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, text = (s.strip() for s in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"{source}:{lineno}: invalid key {key!r}")
        try:
            val = _parse_value(key, text)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
        if key in values:
            if _kind(key) != "matrix":
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            values[key] = values[key] + val
        else:
            values[key] = val
    return values


def _parse_flags(flags: Iterable[str]) -> dict:
    values = {}
    for flag in flags:
        if not flag.startswith("--") or "=" not in flag:
            raise ConfigError(f"flag {flag!r}: expected --key=value")
        key, text = flag[2:].split("=", 1)
        key = key.strip().replace("-", "_")
        try:
            values[key] = _parse_value(key, text)
        except ConfigError as exc:
            raise ConfigError(f"flag {flag!r}: {exc}") from None
    return values


def _validate(values: dict) -> None:
    exp = values.get("experiment")
    if exp is not None and exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; registered: " + ", ".join(EXPERIMENTS))
    for key in ("dt", "T", "mu0_var"):
        if key in values and not values[key] > 0:
            raise ConfigError(f"{key} must be positive")
    for key in ("m", "m_limit", "n", "d", "cases", "sweeps", "record_every", "replicates"):
        if key in values and values[key] < 1:
            raise ConfigError(f"{key} must be >= 1")
    if "tau" in values and any(t <= 0 for t in values["tau"]):
        raise ConfigError("tau values must be positive")
    if "grid" in values:
        lo, hi, npts = values["grid"]
        if not lo < hi or npts < 16:
            raise ConfigError("grid needs lo < hi and at least 16 points")
    if "family" in values and values["family"] not in FAMILIES:
        raise ConfigError(f"family must be one of {', '.join(FAMILIES)}")
    dims = {}
    for key in ("Q", "A"):
        if key in values:
            rows = values[key]
            if any(len(r) != len(rows) for r in rows):
                raise ConfigError(f"{key} must be square, got rows of lengths {[len(r) for r in rows]}")
            dims[key] = len(rows)
    if "Q" in values:
        Q = np.array(values["Q"])
        if not np.allclose(Q, Q.T, rtol=1e-12, atol=0):
            raise ConfigError("Q must be symmetric")
    if "A" in values and any(values["A"][i][i] != 0 for i in range(dims["A"])):
        raise ConfigError("A must have a zero diagonal")
    if "l" in values:
        dims["l"] = len(values["l"])
    if "mu0_mean" in values:
        dims["mu0_mean"] = len(values["mu0_mean"])
    if "n" in values:
        dims["n"] = values["n"]
    if len(set(dims.values())) > 1:
        raise ConfigError("conflicting dimensions: " + ", ".join(f"{k}={v}" for k, v in sorted(dims.items())))


def parse_config(path=None, flags: Iterable[str] = (), text: Optional[str] = None) -> ExperimentConfig:
    """Read a config file (or ``text``), apply ``--key=value`` flags, validate and fill defaults."""
    values: dict = {}
    if text is not None:
        values = _parse_lines(text.splitlines(), "<text>")
    elif path is not None:
        p = Path(path)
        try:
            content = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
        values = _parse_lines(content.splitlines(), str(p))
    values.update(_parse_flags(flags))
    _validate(values)
    exp = values.pop("experiment", None)
    seed = values.pop("seed", DEFAULTS["seed"])
    output_dir = values.pop("output_dir", None)
    for key, val in DEFAULTS.items():
        if key != "seed":
            values.setdefault(key, val)
    return ExperimentConfig(exp, seed, values, output_dir)
