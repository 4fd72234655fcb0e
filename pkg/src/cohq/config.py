"""Run configuration: flat ``key = value`` files, flag overrides, canonical hash.

Example file::

    schema_version = 1
    model = A
    r_sq = 6
    cutoff = 10
    tol.kin_phys = 1e-10
    labels = 0, 0.5, 1+1j
    sweep.r_sq = 6, 22, 102

Unknown keys are rejected with the offending key as the field path. Every
tolerance has a default, and the resolved map is embedded in each report.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .coherent import QuadratureSpec
from .errors import ConfigError
from .fock import Scheme
from .models import DEFAULT_SCHEME, Model

SCHEMA_VERSION = 1

SUITES = (
    "check-algebra",
    "casimir-identity",
    "select-rep",
    "resolve-identity",
    "kin-phys-equality",
    "project-hw",
    "classical-maps",
    "semiclassical-sweep",
    "full",
)

TOLERANCE_DEFAULTS = {
    "algebra_su2": 1e-12,
    "algebra_su11": 1e-11,
    "hermiticity": 1e-13,
    "casimir_identity": 1e-10,
    "casimir_commutator": 1e-11,
    "casimir_eigenvalue": 1e-10,
    "eigen_zero": 1e-9,
    "kin_phys": 1e-10,
    "fixed_point": 1e-12,
    "negative_control_gap": 1e-3,
    "tail_eps": 1e-12,
    "hw_tail_eps": 1e-8,
    "resolution_su2": 1e-8,
    "resolution_su11": 1e-4,
    "resolution_su11_corrected": 1e-6,
    "oracle": 1e-12,
    "surface_residual": 1e-12,
    "gauge_invariance": 1e-10,
    "flow_group": 1e-12,
    "classical_casimir": 1e-10,
    "roundtrip": 1e-10,
    "semiclassical": 1e-10,
    "min_uncertainty": 1e-10,
}

MODEL_DEFAULTS = {
    Model.A: {
        "r_sq": 6.0,
        "cutoff": 10,
        "margin": 0,
        "labels": (0j, 0.5 + 0j, 1 + 1j),
        "sweep_chart1": (0.0, 0.3, np.pi / 4, 1.2),
        "sweep_chart2": (0.0, 1.0, 2.5, 4.0),
        "sweep_r_sq": (6.0, 22.0, 102.0),
    },
    Model.B: {
        "r_sq": 2.0,
        "cutoff": 24,
        "margin": 4,
        "labels": (0j, complex(0.3 * np.exp(0.25j * np.pi)), 0.5 + 0j),
        "sweep_chart1": (0.0, 0.15, 0.3),
        "sweep_chart2": (0.0, 1.5, 3.0),
        "sweep_r_sq": (2.0, 4.0, 10.0),
    },
    Model.C: {
        "r_sq": 4.0,
        "cutoff": 12,
        "margin": 4,
        "labels": (),
        "sweep_chart1": (0.2, 0.6),
        "sweep_chart2": (-0.5, 0.5),
        "sweep_r_sq": (4.0,),
    },
}


@dataclass(frozen=True)
class RunConfig:
    model: Model
    r_sq: float
    hbar: float = 1.0
    scheme: Scheme | None = None
    cutoff: int | None = None
    margin: int | None = None
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCE_DEFAULTS))
    labels: tuple = ()
    hw_pairs: tuple = ((0.6 + 0j, 0.4 + 0j), (0.3j, 0.5 + 0j))
    sweep_chart1: tuple = ()
    sweep_chart2: tuple = ()
    sweep_r_sq: tuple = ()
    seed: int = 20240601
    classical_samples: int = 1000
    sign_samples: int = 100_000
    oracle_cutoff: int = 6
    oracle_nodes: int = 64
    out: str | None = None
    format: str = "json"
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}; expected {SCHEMA_VERSION}",
                              "schema_version")
        if not np.isfinite(self.r_sq) or self.r_sq <= 0:
            raise ConfigError(f"r_sq must be a positive number, got {self.r_sq!r}", "r_sq")
        if not np.isfinite(self.hbar) or self.hbar <= 0:
            raise ConfigError(f"hbar must be a positive number, got {self.hbar!r}", "hbar")
        if self.cutoff is not None and self.cutoff < 1:
            raise ConfigError(f"cutoff must be >= 1, got {self.cutoff}", "cutoff")
        if self.margin is not None and self.margin < 0:
            raise ConfigError(f"margin must be >= 0, got {self.margin}", "margin")
        for name, value in self.tolerances.items():
            if name not in TOLERANCE_DEFAULTS:
                raise ConfigError(f"unknown tolerance {name!r}", f"tol.{name}")
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"tolerance must be positive, got {value!r}", f"tol.{name}")
        for name in ("classical_samples", "sign_samples", "oracle_cutoff", "oracle_nodes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1", name)
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}", "format")

    # ---- resolved views -------------------------------------------------

    def resolved(self) -> "RunConfig":
        """Fill model-dependent defaults so the hashed form is explicit."""
        d = MODEL_DEFAULTS[self.model]
        return replace(
            self,
            scheme=self.scheme or DEFAULT_SCHEME[self.model],
            cutoff=d["cutoff"] if self.cutoff is None else self.cutoff,
            margin=d["margin"] if self.margin is None else self.margin,
            tolerances={**TOLERANCE_DEFAULTS, **self.tolerances},
        )

    def tol(self, name: str) -> float:
        return float({**TOLERANCE_DEFAULTS, **self.tolerances}[name])

    def to_dict(self) -> dict:
        """Canonical form of the resolved config (output location excluded)."""
        r = self.resolved()
        out = asdict(r)
        out["model"] = r.model.value
        out["scheme"] = r.scheme.value
        out["tolerances"] = dict(sorted(r.tolerances.items()))
        out["labels"] = [[z.real, z.imag] for z in r.labels]
        out["hw_pairs"] = [[[a.real, a.imag], [b.real, b.imag]] for a, b in r.hw_pairs]
        out["sweep_chart1"] = list(r.sweep_chart1)
        out["sweep_chart2"] = list(r.sweep_chart2)
        out["sweep_r_sq"] = list(r.sweep_r_sq)
        del out["out"], out["format"]
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# parsing

_SCALAR_KEYS = {
    "schema_version": int,
    "model": str,
    "r_sq": float,
    "hbar": float,
    "scheme": str,
    "cutoff": int,
    "margin": int,
    "seed": int,
    "classical_samples": int,
    "sign_samples": int,
    "oracle_cutoff": int,
    "oracle_nodes": int,
    "out": str,
    "format": str,
    "quadrature.radial_nodes": int,
    "quadrature.angular_nodes": int,
    "quadrature.su11_cutoff": float,
}
_LIST_KEYS = {
    "labels": complex,
    "sweep.chart1": float,
    "sweep.chart2": float,
    "sweep.r_sq": float,
}


def _convert(key: str, raw: str, kind):
    try:
        if kind is int:
            value = float(raw)
            if not value.is_integer():
                raise ValueError(raw)
            return int(value)
        return kind(raw.replace(" ", "")) if kind is complex else kind(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {kind.__name__}", key) from None


def _parse_pairs(key: str, raw: str) -> tuple:
    pairs = []
    for item in _split(raw):
        parts = item.split(":")
        if len(parts) != 2:
            raise ConfigError(f"expected 'z1:z2', got {item!r}", key)
        pairs.append(tuple(_convert(key, p.strip(), complex) for p in parts))
    return tuple(pairs)


def _split(raw: str) -> list[str]:
    return [p.strip() for p in raw.split(",") if p.strip()]


def parse_assignments(pairs) -> dict:
    """Turn ``(key, raw_value)`` pairs into typed overrides keyed like the file."""
    out = {}
    for key, raw in pairs:
        key = key.strip()
        raw = raw.strip()
        if key in _SCALAR_KEYS:
            out[key] = _convert(key, raw, _SCALAR_KEYS[key])
        elif key in _LIST_KEYS:
            out[key] = tuple(_convert(key, item, _LIST_KEYS[key]) for item in _split(raw))
        elif key == "hw_pairs":
            out[key] = _parse_pairs(key, raw)
        elif key.startswith("tol."):
            name = key[4:]
            if name not in TOLERANCE_DEFAULTS:
                raise ConfigError(f"unknown tolerance {name!r}", key)
            out[key] = _convert(key, raw, float)
        else:
            raise ConfigError(f"unknown configuration key {key!r}", key)
    return out


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}", "config") from None
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}", f"config:{lineno}")
        key, value = line.split("=", 1)
        pairs.append((key, value))
    return parse_assignments(pairs)


def build_config(values: dict) -> RunConfig:
    """RunConfig from typed overrides; model-dependent defaults fill the rest."""
    values = dict(values)
    try:
        model = Model.parse(values.pop("model", "A"))
    except ValueError as exc:
        raise ConfigError(str(exc), "model") from None
    d = MODEL_DEFAULTS[model]
    kwargs = {"model": model}
    if "scheme" in values:
        try:
            kwargs["scheme"] = Scheme(values.pop("scheme").lower())
        except ValueError:
            raise ConfigError("scheme must be 'total' or 'permode'", "scheme") from None
    quad = {}
    tols = {}
    for key, value in values.items():
        if key.startswith("quadrature."):
            quad[key.split(".", 1)[1]] = value
        elif key.startswith("tol."):
            tols[key[4:]] = value
        elif key.startswith("sweep."):
            kwargs["sweep_" + key.split(".", 1)[1]] = value
        else:
            kwargs[key] = value
    if quad:
        try:
            kwargs["quadrature"] = QuadratureSpec(**quad)
        except ValueError as exc:
            raise ConfigError(str(exc), "quadrature") from None
    kwargs["tolerances"] = {**TOLERANCE_DEFAULTS, **tols}
    kwargs.setdefault("r_sq", d["r_sq"])
    kwargs.setdefault("labels", d["labels"])
    for key in ("sweep_chart1", "sweep_chart2", "sweep_r_sq"):
        kwargs.setdefault(key, d[key])
    return RunConfig(**kwargs)


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """File values first, then ``overrides`` (flags win)."""
    values = read_config_file(path) if path is not None else {}
    values.update(overrides or {})
    return build_config(values)
