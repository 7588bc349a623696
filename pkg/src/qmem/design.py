"""Closed-form design estimates: motional dephasing, density, mode count and validity checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .params import C_LIGHT, CS_D2, K_BOLTZMANN, ParameterError, PhysicalPreset
from .singlemode import phasematch_angle

# Reference values reported next to the computed ones.
QUOTED_STORAGE_TIME = 200e-9
QUOTED_MODE_COUNT = 100
QUOTED_DENSITY = 1e19
DENSITY_SCALE = 1.0  # Theta, m^-3 s^2


@dataclass(frozen=True)
class DesignInput:
    preset: PhysicalPreset = CS_D2
    pulse_T: float = 250e-12
    L: float | None = None
    A: float | None = None
    T_e: float | None = None
    t_s: float = 100e-9
    delta_max: float = 0.0
    delta_theta: float | None = None
    F_min: float = 0.9

    def __post_init__(self):
        p = self.preset
        for name, default in (("L", p.L), ("A", p.area), ("T_e", p.T_e)):
            if getattr(self, name) is None:
                object.__setattr__(self, name, default)
        for name in ("pulse_T", "L", "A", "T_e", "delta_theta"):
            v = getattr(self, name)
            if name == "delta_theta" and v is None:
                v = p.wavelength / math.sqrt(self.A)
                object.__setattr__(self, name, v)
            if not (v > 0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be positive, got {v!r}")
        if self.t_s < 0:
            raise ParameterError("t_s must be >= 0")
        if self.delta_max < 0:
            raise ParameterError("delta_max must be >= 0")
        if not 0 < self.F_min < 1:
            raise ParameterError(f"F_min must lie in (0, 1), got {self.F_min}")

    @property
    def k_c(self) -> float:
        return (self.preset.omega_s + self.preset.omega_13) / C_LIGHT

    @property
    def theta_c(self) -> float:
        return phasematch_angle(self.preset.omega_s, self.preset.omega_13)

    def thermal_rate(self, theta_c: float) -> float:
        """|k_c| theta_c sqrt(k_B T_e / M), the motional dephasing rate in 1/s."""
        return self.k_c * theta_c * math.sqrt(K_BOLTZMANN * self.T_e / self.preset.mass)


def motional_fidelity(inp: DesignInput, theta_c: float, t_s: float | None = None) -> float:
    t = inp.t_s if t_s is None else t_s
    if t < 0 or theta_c < 0:
        raise ParameterError("t_s and theta_c must be >= 0")
    r = inp.thermal_rate(theta_c)
    return math.exp(-(r * t) ** 2)


def max_storage_time(inp: DesignInput, theta_c: float, F_min: float | None = None) -> float:
    F = inp.F_min if F_min is None else F_min
    if not 0 < F < 1:
        raise ParameterError(f"F_min must lie in (0, 1), got {F}")
    if theta_c <= 0:
        return math.inf
    return math.sqrt(-math.log(F)) / inp.thermal_rate(theta_c)


def required_density(pulse_T: float, theta: float = DENSITY_SCALE) -> float:
    if not pulse_T > 0:
        raise ParameterError("pulse_T must be positive")
    return theta / pulse_T**2


def mode_count_raw(inp: DesignInput) -> float:
    """(theta_max - sqrt(2 omega_13 / (omega_1m + delta_max))) / delta_theta before flooring."""
    p = inp.preset
    theta_max = math.sqrt(inp.A) / inp.L
    return (theta_max - math.sqrt(2 * p.omega_13 / (p.omega_1m + inp.delta_max))) / inp.delta_theta


def mode_count(inp: DesignInput) -> int:
    return max(0, math.floor(mode_count_raw(inp)))


@dataclass(frozen=True)
class Constraint:
    name: str
    left: float
    right: float
    ratio: float
    passed: bool
    kind: str  # "much_greater" or "comparable"


@dataclass(frozen=True)
class ConstraintReport:
    constraints: tuple[Constraint, ...]
    margin: float
    window: tuple[float, float]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.constraints)

    def __getitem__(self, name: str) -> Constraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "margin": self.margin,
            "window": list(self.window),
            "all_passed": self.all_passed,
            "constraints": [asdict(c) for c in self.constraints],
        }


def validate_constraints(
    inp: DesignInput, theta_c: float, margin: float = 10.0, window: tuple[float, float] = (0.2, 5.0)
) -> ConstraintReport:
    """Check the regime of validity; ``>>`` means ratio >= margin, ``~`` means ratio within window."""
    if margin <= 0 or not 0 < window[0] <= window[1]:
        raise ParameterError("invalid margin or window")
    T, L, A = inp.pulse_T, inp.L, inp.A
    lam = inp.preset.wavelength

    def much(name, left, right):
        ratio = math.inf if right == 0 else left / right
        return Constraint(name, left, right, ratio, ratio >= margin, "much_greater")

    def comparable(name, left, right):
        ratio = left / right
        return Constraint(name, left, right, ratio, window[0] <= ratio <= window[1], "comparable")

    items = (
        much("theta_c << sqrt(Tc/L)", math.sqrt(T * C_LIGHT / L), theta_c),
        much("theta_c << sqrt(A)/L", math.sqrt(A) / L, theta_c),
        much("Tc >> L", T * C_LIGHT, L),
        much("L >> sqrt(A)", L, math.sqrt(A)),
        much("T omega_13 >> 1", T * inp.preset.omega_13, 1.0),
        comparable("A ~ lambda L", A, lam * L),
    )
    return ConstraintReport(items, margin, tuple(window))


@dataclass(frozen=True)
class DesignReport:
    inputs: dict
    theta_c: float
    theta_c_deg: float
    fidelity: float
    max_storage_time: float
    max_storage_time_quoted: float
    required_density: float
    required_density_quoted: float
    mode_count: int
    mode_count_raw: float
    mode_count_quoted: int
    constraints: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def design_report(inp: DesignInput, margin: float = 10.0, window=(0.2, 5.0)) -> DesignReport:
    """Every estimate for one input, with the reference values next to the computed ones."""
    th = inp.theta_c
    echoed = {k: v for k, v in asdict(inp).items() if k != "preset"}
    echoed["preset"] = inp.preset.name
    return DesignReport(
        inputs=echoed,
        theta_c=th,
        theta_c_deg=math.degrees(th),
        fidelity=motional_fidelity(inp, th),
        max_storage_time=max_storage_time(inp, th),
        max_storage_time_quoted=QUOTED_STORAGE_TIME,
        required_density=required_density(inp.pulse_T),
        required_density_quoted=QUOTED_DENSITY,
        mode_count=mode_count(inp),
        mode_count_raw=mode_count_raw(inp),
        mode_count_quoted=QUOTED_MODE_COUNT,
        constraints=validate_constraints(inp, th, margin, window).to_dict(),
    )
