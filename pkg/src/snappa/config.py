"""Plain-text key-value configuration files with explicit unit suffixes.

Schema
------
One ``key = value`` pair per line; ``#`` starts a comment. Values are either
bare numbers (dimensionless), numbers with a unit suffix, or comma-separated
integer lists. Recognized suffixes:

===========  =========================================================
``GHz MHz kHz Hz``   frequencies, interpreted as *linear* frequency and
                     converted to angular rad/s internally (x 2*pi)
``s ms us ns``       times in seconds
``rad``              angles in radians (stored as-is)
===========  =========================================================

All frequency-like quantities inside the package are angular (rad/s); the
config layer is the only place linear <-> angular conversion happens.

The shipped ``data/system.cfg`` reproduces the reference device constants
(qubit/cavity frequencies, dispersive shifts, Kerr, anharmonicity, coherence
times) plus the default drive / truncation / integration settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .hamiltonian import EnvelopeSpec, StarkFit, SystemParams
from .hilbert import HilbertDims

TWO_PI = 2.0 * math.pi

_FREQ_UNITS = {"ghz": 1e9, "mhz": 1e6, "khz": 1e3, "hz": 1.0}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input."""


def parse_value(raw: str):
    """Parse one config value: number, number+unit, or integer list."""
    raw = raw.strip()
    if "," in raw:
        try:
            return [int(tok) for tok in raw.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad integer list {raw!r}") from exc
    parts = raw.split()
    if len(parts) == 1:
        try:
            return float(parts[0])
        except ValueError as exc:
            raise ConfigError(f"bad numeric value {raw!r}") from exc
    if len(parts) != 2:
        raise ConfigError(f"expected 'number [unit]', got {raw!r}")
    try:
        num = float(parts[0])
    except ValueError as exc:
        raise ConfigError(f"bad numeric value {raw!r}") from exc
    unit = parts[1].lower()
    if unit in _FREQ_UNITS:
        return TWO_PI * num * _FREQ_UNITS[unit]  # linear -> angular
    if unit in _TIME_UNITS:
        return num * _TIME_UNITS[unit]
    if unit == "rad":
        return num
    raise ConfigError(f"unknown unit {parts[1]!r} in {raw!r}")


def read_keyvalues(path) -> dict:
    """Read a key-value config file into a dict of parsed values."""
    out = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = parse_value(raw)
    return out


def format_value(value, unit: str | None = None) -> str:
    """Format a stored (angular / SI) value back into config text."""
    if isinstance(value, list):
        return ",".join(str(int(v)) for v in value)
    if unit is None:
        return repr(float(value))
    unit_l = unit.lower()
    if unit_l in _FREQ_UNITS:
        return f"{value / (TWO_PI * _FREQ_UNITS[unit_l])!r} {unit}"
    if unit_l in _TIME_UNITS:
        return f"{value / _TIME_UNITS[unit_l]!r} {unit}"
    if unit_l == "rad":
        return f"{float(value)!r} rad"
    raise ConfigError(f"unknown unit {unit!r}")


@dataclass(frozen=True)
class RunConfig:
    """Everything a simulation run needs: device constants, Stark-fit
    multipliers, truncation, integration step and drive defaults."""

    params: SystemParams
    stark_fit: StarkFit
    dims: HilbertDims
    step: float
    gate_duration: float
    ramp_duration: float
    xi_qubit: float

    def envelope(self, duration: float | None = None) -> EnvelopeSpec:
        return EnvelopeSpec(
            total_duration=self.gate_duration if duration is None else duration,
            ramp_duration=self.ramp_duration)


_REQUIRED = [
    "omega_q", "omega_c", "chi", "chi_prime", "kerr_c", "alpha_q", "delta",
    "t1_qubit", "t2_qubit", "t1_cavity",
]


def load_run_config(path=None) -> RunConfig:
    """Load a system config file; ``None`` loads the packaged default."""
    if path is None:
        ref = resources.files("snappa").joinpath("data/system.cfg")
        with resources.as_file(ref) as p:
            kv = read_keyvalues(p)
    else:
        kv = read_keyvalues(path)
    missing = [k for k in _REQUIRED if k not in kv]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    try:
        params = SystemParams(**{k: kv[k] for k in _REQUIRED})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    fit = StarkFit(
        eta1=kv.get("eta1", 3.75),
        eta2=kv.get("eta2", 3.35),
        eta12=kv.get("eta12", 60.25),
    )
    dims = HilbertDims(cavity_levels=int(kv.get("cavity_levels", 12)))
    return RunConfig(
        params=params,
        stark_fit=fit,
        dims=dims,
        step=float(kv.get("step", 1e-9)),
        gate_duration=float(kv.get("gate_duration", 4.2e-6)),
        ramp_duration=float(kv.get("ramp_duration", 100e-9)),
        xi_qubit=float(kv.get("xi_qubit", 0.07)),
    )
