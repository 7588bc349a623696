"""Physical presets and the bridge from SI inputs to the dimensionless memory equations.

All frequencies are angular (rad/s); lengths in m; masses in kg; temperatures in K.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from scipy.constants import c as C_LIGHT
from scipy.constants import k as K_BOLTZMANN

TWO_PI = 2.0 * math.pi


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicalPreset:
    """An atomic species/geometry used by the design formulas and the read-out scenarios.

    ``omega_s`` is the nominal signal carrier, ``omega_13`` the Stokes shift and
    ``omega_1m`` the |1> <-> |m> transition frequency. ``gamma`` is the optical
    polarization decay rate; ``density_note`` is an annotation only.
    """

    name: str
    omega_s: float
    omega_13: float
    omega_1m: float
    mass: float
    wavelength: float
    L: float
    area: float
    T_e: float
    gamma: float
    delta: float
    density_note: str = ""

    def __post_init__(self):
        for f in fields(self):
            if f.name in ("name", "density_note"):
                continue
            v = getattr(self, f.name)
            if f.name == "delta":
                continue
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ParameterError(f"preset {self.name!r}: {f.name} must be a positive number, got {v!r}")

    @property
    def k_s(self) -> float:
        return self.omega_s / C_LIGHT

    @property
    def k_c(self) -> float:
        """Control wavenumber for the phasematched ordering (|1> above |3>)."""
        return (self.omega_s + self.omega_13) / C_LIGHT


CS_D2 = PhysicalPreset(
    name="cs-d2",
    omega_s=TWO_PI * (351.7e12 + 10e9),
    omega_13=TWO_PI * 9.2e9,
    omega_1m=TWO_PI * 351.7e12,
    mass=2.21e-25,
    wavelength=852e-9,
    L=0.02,
    area=1e-7,
    T_e=360.0,
    gamma=TWO_PI * 2.6e6,
    delta=TWO_PI * 10e9,
    density_note="~1e19 m^-3 reached in a Cs vapor near 360 K",
)

PRESETS: dict[str, PhysicalPreset] = {CS_D2.name: CS_D2}


def get_preset(name: str, extra: dict[str, PhysicalPreset] | None = None) -> PhysicalPreset:
    table = dict(PRESETS)
    if extra:
        table.update(extra)
    try:
        return table[name]
    except KeyError:
        known = ", ".join(sorted(table))
        raise ParameterError(f"unknown preset {name!r} (known: {known})") from None


# Config keys for a preset section. Frequencies are given in Hz (ordinary) and
# converted to rad/s on load.
_PRESET_KEYS = {
    "signal_hz": ("omega_s", TWO_PI),
    "stokes_shift_hz": ("omega_13", TWO_PI),
    "transition_hz": ("omega_1m", TWO_PI),
    "mass_kg": ("mass", 1.0),
    "wavelength_m": ("wavelength", 1.0),
    "length_m": ("L", 1.0),
    "area_m2": ("area", 1.0),
    "temperature_k": ("T_e", 1.0),
    "gamma_hz": ("gamma", TWO_PI),
    "detuning_hz": ("delta", TWO_PI),
}


def preset_from_mapping(name: str, mapping) -> PhysicalPreset:
    """Build a preset from ``key = value`` pairs using the documented Hz/SI keys.

    Missing keys fall back to the cs-d2 values.
    """
    kwargs = {f.name: getattr(CS_D2, f.name) for f in fields(CS_D2)}
    kwargs["name"] = name
    kwargs["density_note"] = ""
    for key, raw in mapping.items():
        if key == "note":
            kwargs["density_note"] = raw
            continue
        if key not in _PRESET_KEYS:
            raise ParameterError(f"preset {name!r}: unknown key {key!r}")
        attr, scale = _PRESET_KEYS[key]
        try:
            kwargs[attr] = float(raw) * scale
        except ValueError:
            raise ParameterError(f"preset {name!r}: {key} is not a number: {raw!r}") from None
    return PhysicalPreset(**kwargs)


def load_presets(path: str | Path) -> dict[str, PhysicalPreset]:
    """Read ``[preset:NAME]`` sections from an INI-style file."""
    cp = configparser.ConfigParser(strict=True, interpolation=None)
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    out = {}
    for section in cp.sections():
        if section.startswith("preset:"):
            name = section.split(":", 1)[1].strip()
            out[name] = preset_from_mapping(name, dict(cp[section]))
    return out


@dataclass(frozen=True)
class MemoryParams:
    """Coefficients of the single-mode equations plus the physical inputs they came from.

    Only ``C``, ``q`` and ``p`` enter the solver. The remaining fields are needed
    by the residual-phase bookkeeping and are ``None`` for purely dimensionless
    runs.
    """

    C: float
    q: float = 1.0
    p: float = 0.0
    gamma: float | None = None
    delta: float | None = None
    d: float | None = None
    L: float | None = None
    omega_T: float | None = None
    stokes_shift: float | None = None
    omega_1m: float | None = None
    pulse_T: float | None = None

    def __post_init__(self):
        if not self.C >= 0:
            raise ParameterError(f"coupling C must be >= 0, got {self.C}")
        if not self.q > 0:
            raise ParameterError(f"q must be positive, got {self.q}")
        if self.gamma is not None and self.gamma < 0:
            raise ParameterError("gamma must be >= 0")
        if self.d is not None and self.d < 0:
            raise ParameterError("optical depth d must be >= 0")

    @property
    def Gamma(self) -> complex:
        return complex(self.delta, -self.gamma)

    @property
    def kappa2(self) -> float:
        """|kappa|^2 = d gamma / L."""
        return self.d * self.gamma / self.L

    @property
    def has_physical(self) -> bool:
        return None not in (self.gamma, self.delta, self.d, self.L, self.omega_T)

    def with_coupling(self, C: float) -> "MemoryParams":
        """Same medium, control energy rescaled so the coupling becomes ``C``."""
        if not self.has_physical:
            return replace(self, C=C)
        omega_T = C**2 * abs(self.Gamma) ** 2 / self.kappa2 / self.L
        return replace(self, C=coupling(self.kappa2, self.L, omega_T, self.Gamma), omega_T=omega_T)


def coupling(kappa2: float, L: float, omega_T: float, Gamma: complex) -> float:
    """C = |kappa| sqrt(L omega(T)) / |Gamma|."""
    return math.sqrt(kappa2) * math.sqrt(L * omega_T) / abs(Gamma)


def transverse_scale(L: float, omega_1m: float) -> float:
    """Metres per unit of the dimensionless transverse coordinate X."""
    return math.sqrt(2.0 * L * C_LIGHT / omega_1m)


def params_from_physical(
    preset: PhysicalPreset,
    delta: float,
    omega_T: float,
    pulse_T: float,
    theta_c: float,
    *,
    gamma: float | None = None,
    d: float | None = None,
    C: float | None = None,
    L: float | None = None,
) -> MemoryParams:
    """Nondimensionalize a physical configuration.

    Exactly one of ``d`` (optical depth) or ``C`` (target coupling) must be
    given; with ``C`` the optical depth is solved for. The signal carrier is
    ``omega_1m + delta`` and the control is ``omega_13`` above it.
    """
    gamma = preset.gamma if gamma is None else gamma
    L = preset.L if L is None else L
    if pulse_T <= 0 or omega_T <= 0 or L <= 0:
        raise ParameterError("pulse_T, omega_T and L must be positive")
    if gamma <= 0:
        raise ParameterError("gamma must be positive to define the coupling |kappa|^2 = d gamma / L")
    if (d is None) == (C is None):
        raise ParameterError("give exactly one of d or C")
    Gamma = complex(delta, -gamma)
    if C is not None:
        if C < 0:
            raise ParameterError("C must be >= 0")
        d = C**2 * abs(Gamma) ** 2 / (gamma * omega_T)
    elif d < 0:
        raise ParameterError("d must be >= 0")
    kappa2 = d * gamma / L
    omega_s = preset.omega_1m + delta
    if omega_s <= 0:
        raise ParameterError("signal frequency omega_1m + delta must be positive")
    k_s = omega_s / C_LIGHT
    k_c = (omega_s + preset.omega_13) / C_LIGHT
    return MemoryParams(
        C=coupling(kappa2, L, omega_T, Gamma),
        q=k_s * C_LIGHT / preset.omega_1m,
        p=k_c * math.sin(theta_c) * transverse_scale(L, preset.omega_1m),
        gamma=gamma,
        delta=delta,
        d=d,
        L=L,
        omega_T=omega_T,
        stokes_shift=preset.omega_13,
        omega_1m=preset.omega_1m,
        pulse_T=pulse_T,
    )


__all__ = [
    "C_LIGHT",
    "K_BOLTZMANN",
    "CS_D2",
    "PRESETS",
    "MemoryParams",
    "ParameterError",
    "PhysicalPreset",
    "coupling",
    "get_preset",
    "load_presets",
    "params_from_physical",
    "preset_from_mapping",
    "transverse_scale",
]
