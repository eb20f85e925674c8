"""Scenario and sweep configuration: strict JSON parsing and serialization.

The config format is a single JSON document. Unknown fields are rejected at
every level so that a typo'd parameter name fails loudly instead of silently
falling back to a default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .bloch import BlochChannel, CoherenceVector, GKSMatrix, gks_to_channel
from .dynamics import ADAPTIVE_RKF45, FIXED_RK4, IntegratorConfig
from .errors import CohtrackError, ConfigError


def _require_keys(obj: dict, allowed: set, context: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown field(s) {sorted(unknown)}")


def _get(obj: dict, key: str, context: str):
    if key not in obj:
        raise ConfigError(f"{context}: missing required field {key!r}")
    return obj[key]


def _number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}: expected a number, got {value!r}")
    return float(value)


def parse_complex_matrix(rows, context: str) -> np.ndarray:
    """Parse a complex matrix given as nested [re, im] pairs."""
    try:
        arr = np.array([[complex(e[0], e[1]) for e in row] for row in rows])
    except (TypeError, IndexError, ValueError):
        raise ConfigError(f"{context}: expected rows of [re, im] pairs") from None
    return arr


def complex_matrix_to_json(m: np.ndarray) -> list:
    return [[[float(e.real), float(e.imag)] for e in row] for row in m]


@dataclass(frozen=True)
class ChannelSpec:
    """Either a pure-dephasing rate or an explicit GKS matrix."""

    kind: str                       # "dephasing" | "gks"
    gamma: float | None = None
    gks: GKSMatrix | None = None

    @classmethod
    def from_dict(cls, obj, context="channel") -> "ChannelSpec":
        if not isinstance(obj, dict):
            raise ConfigError(f"{context}: expected an object")
        kind = _get(obj, "type", context)
        if kind == "dephasing":
            _require_keys(obj, {"type", "gamma"}, context)
            gamma = _number(_get(obj, "gamma", context), f"{context}.gamma")
            if gamma < 0:
                raise ConfigError(f"{context}.gamma: rate must be >= 0, got {gamma}")
            return cls("dephasing", gamma=gamma)
        if kind == "gks":
            _require_keys(obj, {"type", "matrix"}, context)
            mat = parse_complex_matrix(_get(obj, "matrix", context), f"{context}.matrix")
            try:
                return cls("gks", gks=GKSMatrix(mat))
            except CohtrackError as e:
                raise ConfigError(f"{context}.matrix: {e}") from None
        raise ConfigError(f"{context}.type: must be 'dephasing' or 'gks', got {kind!r}")

    def to_bloch_channel(self) -> BlochChannel:
        if self.kind == "dephasing":
            return BlochChannel.dephasing(self.gamma)
        return gks_to_channel(self.gks)[1]

    def to_dict(self) -> dict:
        if self.kind == "dephasing":
            return {"type": "dephasing", "gamma": self.gamma}
        return {"type": "gks", "matrix": complex_matrix_to_json(self.gks.matrix)}


@dataclass(frozen=True)
class InitialStateSpec:
    """Explicit Bloch vector, or (coherence, purity, phase) with v_z = +sqrt(p - c)."""

    form: str                       # "vector" | "polar"
    v: CoherenceVector
    c: float | None = None          # raw polar inputs, kept for round-trip
    p: float | None = None
    phase: float | None = None

    @classmethod
    def from_dict(cls, obj, context="initial_state") -> "InitialStateSpec":
        if not isinstance(obj, dict):
            raise ConfigError(f"{context}: expected an object")
        if "vx" in obj or "vy" in obj or "vz" in obj:
            _require_keys(obj, {"vx", "vy", "vz"}, context)
            try:
                v = CoherenceVector(_number(_get(obj, "vx", context), f"{context}.vx"),
                                    _number(_get(obj, "vy", context), f"{context}.vy"),
                                    _number(_get(obj, "vz", context), f"{context}.vz"))
            except CohtrackError as e:
                raise ConfigError(f"{context}: {e}") from None
            return cls("vector", v)
        _require_keys(obj, {"coherence", "purity", "phase"}, context)
        c = _number(_get(obj, "coherence", context), f"{context}.coherence")
        p = _number(_get(obj, "purity", context), f"{context}.purity")
        phi = _number(_get(obj, "phase", context), f"{context}.phase")
        if not (0 <= c <= p <= 1):
            raise ConfigError(f"{context}: need 0 <= coherence <= purity <= 1, "
                              f"got coherence={c}, purity={p}")
        rad = math.sqrt(c)
        v = CoherenceVector(rad * math.cos(phi), rad * math.sin(phi), math.sqrt(p - c))
        return cls("polar", v, c=c, p=p, phase=phi)

    def to_dict(self) -> dict:
        if self.form == "vector":
            return {"vx": self.v.vx, "vy": self.v.vy, "vz": self.v.vz}
        return {"coherence": self.c, "purity": self.p, "phase": self.phase}


@dataclass(frozen=True)
class ControlSpec:
    """free, tracked (omega0, optional clip level), or a sampled waveform file."""

    mode: str                       # "free" | "track" | "fixed"
    omega0: float | None = None
    omega_max: float | None = None
    waveform_path: str | None = None

    @classmethod
    def from_dict(cls, obj, context="control") -> "ControlSpec":
        if not isinstance(obj, dict):
            raise ConfigError(f"{context}: expected an object")
        mode = _get(obj, "mode", context)
        if mode == "free":
            _require_keys(obj, {"mode"}, context)
            return cls("free")
        if mode == "track":
            _require_keys(obj, {"mode", "omega0", "omega_max"}, context)
            omega0 = _number(_get(obj, "omega0", context), f"{context}.omega0")
            omega_max = obj.get("omega_max")
            if omega_max is not None:
                omega_max = _number(omega_max, f"{context}.omega_max")
                if omega_max <= 0:
                    raise ConfigError(f"{context}.omega_max: must be positive")
            return cls("track", omega0=omega0, omega_max=omega_max)
        if mode == "fixed":
            _require_keys(obj, {"mode", "waveform"}, context)
            path = _get(obj, "waveform", context)
            if not isinstance(path, str):
                raise ConfigError(f"{context}.waveform: expected a file path string")
            return cls("fixed", waveform_path=path)
        raise ConfigError(f"{context}.mode: must be 'free', 'track' or 'fixed', "
                          f"got {mode!r}")

    def to_dict(self) -> dict:
        if self.mode == "free":
            return {"mode": "free"}
        if self.mode == "track":
            out = {"mode": "track", "omega0": self.omega0}
            if self.omega_max is not None:
                out["omega_max"] = self.omega_max
            return out
        return {"mode": "fixed", "waveform": self.waveform_path}


_INTEGRATOR_KEYS = {"method", "dt", "rtol", "atol", "max_step"}


def integrator_from_dict(obj, context="integrator") -> IntegratorConfig:
    if not isinstance(obj, dict):
        raise ConfigError(f"{context}: expected an object")
    _require_keys(obj, _INTEGRATOR_KEYS, context)
    kwargs = {}
    if "method" in obj:
        method = obj["method"]
        if method not in (FIXED_RK4, ADAPTIVE_RKF45):
            raise ConfigError(f"{context}.method: must be {FIXED_RK4!r} or "
                              f"{ADAPTIVE_RKF45!r}, got {method!r}")
        kwargs["method"] = method
    for key in ("dt", "rtol", "atol", "max_step"):
        if key in obj:
            kwargs[key] = _number(obj[key], f"{context}.{key}")
    try:
        return IntegratorConfig(**kwargs)
    except CohtrackError as e:
        raise ConfigError(f"{context}: {e}") from None


def integrator_to_dict(cfg: IntegratorConfig) -> dict:
    out = {"method": cfg.method, "rtol": cfg.rtol, "atol": cfg.atol}
    if cfg.method == FIXED_RK4:
        out["dt"] = cfg.dt
    if math.isfinite(cfg.max_step):
        out["max_step"] = cfg.max_step
    return out


_SCENARIO_KEYS = {"channel", "initial_state", "control", "t_max",
                  "integrator", "samples", "output"}


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated simulation scenario."""

    channel: ChannelSpec
    initial_state: InitialStateSpec
    control: ControlSpec
    t_max: float
    integrator: IntegratorConfig
    samples: int
    output: str

    @classmethod
    def from_dict(cls, obj) -> "ScenarioConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config: expected a JSON object")
        _require_keys(obj, _SCENARIO_KEYS, "config")
        channel = ChannelSpec.from_dict(_get(obj, "channel", "config"))
        state = InitialStateSpec.from_dict(_get(obj, "initial_state", "config"))
        control = ControlSpec.from_dict(_get(obj, "control", "config"))
        t_max = _number(_get(obj, "t_max", "config"), "t_max")
        if t_max <= 0:
            raise ConfigError(f"t_max: must be positive, got {t_max}")
        integrator = integrator_from_dict(obj.get("integrator", {}))
        samples = obj.get("samples", 501)
        if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
            raise ConfigError(f"samples: must be an integer >= 2, got {samples!r}")
        output = obj.get("output", "trajectory.csv")
        if not isinstance(output, str):
            raise ConfigError("output: expected a file path string")
        return cls(channel, state, control, t_max, integrator, samples, output)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config: invalid JSON: {e}") from None
        return cls.from_dict(obj)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path) as f:
            return cls.from_json(f.read())

    def to_dict(self) -> dict:
        return {
            "channel": self.channel.to_dict(),
            "initial_state": self.initial_state.to_dict(),
            "control": self.control.to_dict(),
            "t_max": self.t_max,
            "integrator": integrator_to_dict(self.integrator),
            "samples": self.samples,
            "output": self.output,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_GRID_KEYS = {"min", "max", "count"}
_SWEEP_KEYS = {"gamma", "c", "p", "output"}


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    count: int

    @classmethod
    def from_dict(cls, obj, context) -> "GridSpec":
        if not isinstance(obj, dict):
            raise ConfigError(f"{context}: expected an object")
        _require_keys(obj, _GRID_KEYS, context)
        lo = _number(_get(obj, "min", context), f"{context}.min")
        hi = _number(_get(obj, "max", context), f"{context}.max")
        count = _get(obj, "count", context)
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ConfigError(f"{context}.count: must be an integer >= 1")
        if not lo <= hi:
            raise ConfigError(f"{context}: need min <= max, got [{lo}, {hi}]")
        return cls(lo, hi, count)

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.count)

    def to_dict(self) -> dict:
        return {"min": self.lo, "max": self.hi, "count": self.count}


@dataclass(frozen=True)
class SweepSpec:
    """Breakdown-time sweep over a (coherence, purity) grid at fixed gamma."""

    gamma: float
    c_grid: GridSpec
    p_grid: GridSpec
    output: str

    @classmethod
    def from_dict(cls, obj) -> "SweepSpec":
        if not isinstance(obj, dict):
            raise ConfigError("sweep: expected a JSON object")
        _require_keys(obj, _SWEEP_KEYS, "sweep")
        gamma = _number(_get(obj, "gamma", "sweep"), "sweep.gamma")
        if gamma < 0:
            raise ConfigError(f"sweep.gamma: rate must be >= 0, got {gamma}")
        c_grid = GridSpec.from_dict(_get(obj, "c", "sweep"), "sweep.c")
        p_grid = GridSpec.from_dict(_get(obj, "p", "sweep"), "sweep.p")
        for name, grid in (("c", c_grid), ("p", p_grid)):
            if grid.lo < 0 or grid.hi > 1:
                raise ConfigError(f"sweep.{name}: grid must lie within [0, 1]")
        output = obj.get("output", "sweep.csv")
        if not isinstance(output, str):
            raise ConfigError("sweep.output: expected a file path string")
        return cls(gamma, c_grid, p_grid, output)

    @classmethod
    def load(cls, path) -> "SweepSpec":
        with open(path) as f:
            text = f.read()
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"sweep: invalid JSON: {e}") from None
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "c": self.c_grid.to_dict(),
                "p": self.p_grid.to_dict(), "output": self.output}
