"""TOML run configuration.

Units are fixed by the schema:

    [material]  spin_density cm^-3, anisotropy_energy J/m^3 (mu0*K_an),
                saturation_magnetization kA/m, gyromagnetic_ratio GHz/T,
                single_spin_coupling mHz, diameter mm, bias_field T,
                crystal_axis "100" | "110"
    [system]    all frequencies and rates in MHz (linear), kerr in MHz
    [drive]     power mW, c MHz^3/mW, frequencies MHz
    [probe]     MHz
    [sweep]     MHz or mW depending on axis
    [critical]  cavity-magnon detuning in MHz

``omega_m``, ``g_m`` and ``kerr`` may be omitted from [system] when a
[material] section is present; they are then derived. Explicit values win.
"""

from __future__ import annotations

import logging
import sys as _sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, KerrMagError
from .model import DriveConfig, DriveTarget, SystemConfig
from .params import MaterialAndGeometry, derive_all

if _sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

PRESETS = (
    "yig-sphere",
    "power-resonant",
    "power-detuned",
    "power-resonant-neg",
    "power-detuned-neg",
    "field-sweep",
    "field-sweep-neg",
    "field-sweep-undriven",
)


class ConfigError(KerrMagError):
    """The config file is missing or not parseable."""


@dataclass
class RunConfig:
    material: MaterialAndGeometry | None
    system: SystemConfig | None
    drive: DriveConfig | None
    probe: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    critical: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    source: str = ""

    def require(self, *names: str):
        for name in names:
            if getattr(self, name) is None:
                raise InvalidInputError(f"config needs a [{name}] section for this command")

    def probe_axis(self) -> np.ndarray:
        p = self.probe
        centre = self.system.omega_c if self.system else 0.0
        start = p.get("start", centre - 100.0)
        stop = p.get("stop", centre + 100.0)
        return np.linspace(start, stop, int(p.get("points", 401)))

    def sweep_values(self) -> np.ndarray:
        s = self.sweep
        axis = s.get("axis", "omega_m")
        if axis == "power":
            start, stop = s.get("start", 0.0), s.get("stop", 200.0)
        else:
            centre = self.system.omega_c if self.system else 0.0
            start, stop = s.get("start", centre - 100.0), s.get("stop", centre + 100.0)
        return np.linspace(start, stop, int(s.get("points", 401)))

    def resolved(self) -> dict:
        """Plain-data view of everything the run used, for provenance headers."""

        def clean(obj):
            if obj is None:
                return None
            d = asdict(obj)
            return {k: (v.value if hasattr(v, "value") else v) for k, v in d.items()}

        return {
            "source": self.source,
            "material": clean(self.material),
            "system": clean(self.system),
            "drive": clean(self.drive),
            "probe": dict(self.probe),
            "sweep": dict(self.sweep),
            "critical": dict(self.critical),
            "oracle": dict(self.oracle),
        }


_MATERIAL_UNITS = {
    "spin_density": 1e6,  # cm^-3 -> m^-3
    "anisotropy_energy": 1.0,
    "saturation_magnetization": 1e3,  # kA/m -> A/m
    "gyromagnetic_ratio": 1e9,  # GHz/T -> Hz/T
    "single_spin_coupling": 1e-3,  # mHz -> Hz
    "diameter": 1e-3,  # mm -> m
    "bias_field": 1.0,
}


def _material(section: dict) -> MaterialAndGeometry:
    kwargs = {}
    for key, value in section.items():
        if key == "crystal_axis":
            kwargs[key] = str(value)
        elif key in _MATERIAL_UNITS:
            kwargs[key] = float(value) * _MATERIAL_UNITS[key]
        else:
            raise InvalidInputError(f"unknown [material] key {key!r}")
    return MaterialAndGeometry(**kwargs)


def _system(section: dict, material: MaterialAndGeometry | None) -> SystemConfig:
    sec = dict(section)
    derived = derive_all(material) if material is not None else None
    if derived is not None:
        auto = {"g_m": derived.g_m * 1e-6, "kerr": derived.kerr * 1e-6, "macrospin_s": derived.macrospin_s}
        if "omega_m" not in sec and "detuning" not in sec:
            auto["omega_m"] = derived.omega_m * 1e-6
        for key, value in auto.items():
            if key in sec:
                log.info("explicit [system] %s = %g overrides derived value %g", key, sec[key], value)
            else:
                sec[key] = value
    if "detuning" in sec:
        if "omega_m" in sec:
            raise InvalidInputError("give either omega_m or detuning in [system], not both")
        sec["omega_m"] = sec["omega_c"] - sec.pop("detuning")
    missing = [k for k in ("omega_c", "omega_m", "kappa_i", "kappa_o", "gamma_m", "g_m", "kerr") if k not in sec]
    if missing:
        raise InvalidInputError(f"[system] is missing {', '.join(missing)}")
    sec.setdefault("kappa_int", 0.0)
    known = {"omega_c", "omega_m", "kappa_i", "kappa_o", "kappa_int", "gamma_m", "g_m", "kerr", "macrospin_s"}
    unknown = set(sec) - known
    if unknown:
        raise InvalidInputError(f"unknown [system] keys {sorted(unknown)}")
    return SystemConfig(**{k: float(v) for k, v in sec.items()})


def _drive(section: dict, system: SystemConfig) -> DriveConfig:
    sec = dict(section)
    given = [k for k in ("omega_d", "delta_c", "delta_m") if k in sec]
    if len(given) != 1:
        raise InvalidInputError("[drive] needs exactly one of omega_d, delta_c, delta_m")
    key = given[0]
    value = float(sec.pop(key))
    omega_d = {"omega_d": value, "delta_c": system.omega_c - value, "delta_m": system.omega_m - value}[key]
    target = DriveTarget(sec.pop("target", "yig"))
    power = float(sec.pop("power", 0.0))
    c = float(sec.pop("c", 2.0 if system.kerr >= 0 else -2.0))
    rabi = sec.pop("rabi", None)
    if sec:
        raise InvalidInputError(f"unknown [drive] keys {sorted(sec)}")
    return DriveConfig(target, omega_d, power, c, None if rabi is None else float(rabi))


def parse_config(data: dict, source: str = "") -> RunConfig:
    material = _material(data["material"]) if "material" in data else None
    system = _system(data["system"], material) if "system" in data else None
    drive = None
    if "drive" in data:
        if system is None:
            raise InvalidInputError("[drive] requires a [system] section")
        drive = _drive(data["drive"], system)
    return RunConfig(
        material=material,
        system=system,
        drive=drive,
        probe=dict(data.get("probe", {})),
        sweep=dict(data.get("sweep", {})),
        critical=dict(data.get("critical", {})),
        oracle=dict(data.get("oracle", {})),
        output=dict(data.get("output", {})),
        source=source,
    )


def preset_text(name: str) -> str:
    return resources.files("kerrmag.presets").joinpath(f"{name}.toml").read_text()


def load_config(path_or_preset: str) -> RunConfig:
    """Load a TOML file, or one of the shipped presets by name."""
    path = Path(path_or_preset)
    if path.is_file():
        text, source = path.read_text(), str(path)
    elif path_or_preset in PRESETS:
        text, source = preset_text(path_or_preset), f"preset:{path_or_preset}"
    else:
        raise ConfigError(f"no such config file or preset: {path_or_preset!r}")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return parse_config(data, source)
