"""Two frequency-encoded signal components stored in one ensemble.

Equations (norm-conserving phase convention)::

    (lap_X / 4q + i d_zeta) a_j = i C_m c_j exp(-i(p_j X + zeta/R_j + kz_j zeta)) b
    d_eps b = -C_m^* sum_j exp(i(p_j X + zeta/R_j + kz_j zeta)) cbar_j a_j

``p_j`` is the transverse momentum imprinted on the spin wave by control j (so
a control at angle theta carries p = -|k_c| sin(theta) in units of X^-1).
``kz_j`` is a longitudinal control-wavevector offset, zero for storage; on
read-out it encodes the control-frequency change that keeps an off-axis
emission phasematched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import engine
from .grid import GridError, GridSpec, SignalField, SpinWave, norm2, transverse_spectrum
from .params import C_LIGHT, CS_D2, ParameterError, PhysicalPreset, transverse_scale
from .singlemode import SolverOptions, make_propagator


@dataclass(frozen=True)
class MultimodeParams:
    C_m: complex
    c: tuple[complex, complex]
    cbar: tuple[complex, complex]
    p: tuple[float, float] = (0.0, 0.0)
    q: float = 1.0
    inv_R: tuple[complex, complex] = (0.0, 0.0)
    kz: tuple[float, float] = (0.0, 0.0)
    # physical inputs, if built from them
    Omega: tuple[complex, complex] | None = None
    Gamma: tuple[complex, complex] | None = None
    W: float | None = None
    kappa: complex | None = None
    L: float | None = None
    T: float | None = None

    def __post_init__(self):
        for name in ("c", "cbar", "p", "inv_R", "kz"):
            v = getattr(self, name)
            if len(v) != 2:
                raise ParameterError(f"{name} must have two entries")
            object.__setattr__(self, name, tuple(v))
        if not self.q > 0:
            raise ParameterError("q must be positive")

    @classmethod
    def dimensionless(
        cls,
        C_m: float,
        c=(math.sqrt(0.5), math.sqrt(0.5)),
        p=(0.0, 0.0),
        q: float = 1.0,
        inv_R=(0.0, 0.0),
        kz=(0.0, 0.0),
    ) -> "MultimodeParams":
        """Lossless parameters: cbar_j = conj(c_j)."""
        c = tuple(complex(v) for v in c)
        return cls(C_m=complex(C_m), c=c, cbar=tuple(np.conj(c)), p=tuple(p), q=q, inv_R=tuple(inv_R), kz=tuple(kz))

    @classmethod
    def from_physical(cls, Omega, Gamma, kappa: complex, L: float, T: float, p=(0.0, 0.0), q: float = 1.0, kz=(0.0, 0.0)):
        """Build every coefficient from Rabi frequencies, complex detunings and coupling.

        W = sum_j omega_j(T)/|Gamma_j|^2 with omega_j(T) = |Omega_j|^2 T (flat-top envelope).
        """
        Omega = tuple(complex(o) for o in Omega)
        Gamma = tuple(complex(g) for g in Gamma)
        if any(g == 0 for g in Gamma):
            raise ParameterError("Gamma_j must be nonzero")
        if T <= 0 or L <= 0:
            raise ParameterError("T and L must be positive")
        W = sum(abs(o) ** 2 * T / abs(g) ** 2 for o, g in zip(Omega, Gamma))
        if W <= 0:
            raise ParameterError("at least one control must be on")
        C_m = kappa * math.sqrt(L * W)
        pref = math.sqrt(T / W)
        c = tuple(pref * o / g for o, g in zip(Omega, Gamma))
        cbar = tuple(pref * np.conj(o) / g for o, g in zip(Omega, Gamma))
        R = tuple(g * math.sqrt(W) / (abs(kappa) * math.sqrt(L)) for g in Gamma)
        return cls(
            C_m=complex(C_m), c=c, cbar=cbar, p=tuple(p), q=q, inv_R=tuple(1.0 / r for r in R), kz=tuple(kz),
            Omega=Omega, Gamma=Gamma, W=W, kappa=complex(kappa), L=L, T=T,
        )

    @property
    def R(self):
        return tuple(math.inf if r == 0 else 1.0 / r for r in self.inv_R)

    def normalization_defect(self) -> float:
        """|sum |c_j|^2 - (T/W) sum |Omega_j|^2/|Gamma_j|^2|; zero for consistent coefficients."""
        lhs = sum(abs(v) ** 2 for v in self.c)
        if self.W is None:
            return abs(lhs - 1.0)
        rhs = self.T / self.W * sum(abs(o) ** 2 / abs(g) ** 2 for o, g in zip(self.Omega, self.Gamma))
        return abs(lhs - rhs)

    def spectrally_separated(self, bandwidths, margin: float = 10.0) -> bool:
        """|Delta_1 - Delta_2| >> delta_1 + delta_2, with ">>" meaning a factor ``margin``."""
        if self.Gamma is None:
            raise ParameterError("detunings unknown for dimensionless parameters")
        return abs(self.Gamma[0].real - self.Gamma[1].real) >= margin * (bandwidths[0] + bandwidths[1])

    def select(self, active) -> "MultimodeParams":
        """Switch off the controls whose entry in ``active`` is false."""
        c = tuple(v if on else 0j for v, on in zip(self.c, active))
        cbar = tuple(v if on else 0j for v, on in zip(self.cbar, active))
        return replace(self, c=c, cbar=cbar)

    def chi_signal(self, j: int, tau: float, z):
        """chi_j(tau, z) = sum_i omega_i(tau)/Gamma_i + |kappa|^2 z / Gamma_j (flat-top envelope)."""
        self._need_physical()
        k2 = abs(self.kappa) ** 2
        return sum(abs(o) ** 2 * tau / g for o, g in zip(self.Omega, self.Gamma)) + k2 * np.asarray(z) / self.Gamma[j]

    def chi_spin(self, tau: float):
        """chi_B(tau) = sum_i omega_i(tau)/Gamma_i^2 (flat-top envelope)."""
        self._need_physical()
        return sum(abs(o) ** 2 * tau / g**2 for o, g in zip(self.Omega, self.Gamma))

    def _need_physical(self):
        if self.Omega is None:
            raise ParameterError("physical inputs unavailable")

    def couplings(self, grid: GridSpec):
        zeta = grid.zeta[:, None]
        x = grid.x[None, :]
        g = np.empty((2, grid.n_zeta, grid.n_x), dtype=complex)
        h = np.empty_like(g)
        for j in range(2):
            arg = self.p[j] * x + (self.inv_R[j] + self.kz[j]) * zeta
            g[j] = self.C_m * self.c[j] * np.exp(-1j * arg)
            h[j] = np.conj(self.C_m) * self.cbar[j] * np.exp(1j * arg)
        return g, h


@dataclass(frozen=True)
class MultimodeState:
    a1: SignalField
    a2: SignalField
    b: SpinWave

    def total_norm(self) -> float:
        return norm2(self.a1) + norm2(self.a2) + norm2(self.b)


def _march(mp: MultimodeParams, grid: GridSpec, a_in: np.ndarray, b_in: np.ndarray, options=None):
    g, h = mp.couplings(grid)
    res = engine.march(g, h, a_in, b_in, grid.d_eps, grid.d_zeta, make_propagator(grid, mp.q, options))
    if not (np.all(np.isfinite(res.alpha_out)) and np.all(np.isfinite(res.beta_out))):
        raise FloatingPointError("solver produced non-finite values")
    return res


def solve_multimode_storage(
    mp: MultimodeParams, grid: GridSpec, a1_in: SignalField, a2_in: SignalField, options: SolverOptions | None = None
) -> MultimodeState:
    """Store both components; returns the transmitted signals and the spin wave at eps = 1."""
    a_in = np.stack([a1_in.values, a2_in.values])
    res = _march(mp, grid, a_in, np.zeros((grid.n_zeta, grid.n_x)), options)
    return MultimodeState(SignalField(res.alpha_out[0], grid), SignalField(res.alpha_out[1], grid), SpinWave(res.beta_out, grid))


def solve_multimode_retrieval(
    mp_out: MultimodeParams, grid: GridSpec, b_in: SpinWave, selection=(True, True), options: SolverOptions | None = None
) -> MultimodeState:
    """Read out with the controls flagged in ``selection``.

    ``b_in`` must already be in the read-out frame (e.g. mirrored for backward
    read-out). Returns both output components and the spin wave left behind.
    """
    mp = mp_out.select(selection)
    res = _march(mp, grid, np.zeros((2, grid.n_eps, grid.n_x)), b_in.values, options)
    return MultimodeState(SignalField(res.alpha_out[0], grid), SignalField(res.alpha_out[1], grid), SpinWave(res.beta_out, grid))


def readout_params(mp_store: MultimodeParams, p_readout, C_m=None) -> MultimodeParams:
    """Read-out coefficients for controls with transverse momenta ``p_readout``.

    Component j is emitted with transverse momentum p_j(store) - p_j(readout);
    kz_j is set to K^2/4q so that this off-axis emission stays phasematched,
    which corresponds to retuning that control's frequency.
    """
    kz = tuple((ps - pr) ** 2 / (4.0 * mp_store.q) for ps, pr in zip(mp_store.p, p_readout))
    out = replace(mp_store, p=tuple(p_readout), kz=kz)
    if C_m is not None:
        out = replace(out, C_m=complex(C_m))
    return out


# --------------------------------------------------------------------------
# transverse-momentum bands


def band_energies(b: SpinWave, centers, half_width: float) -> np.ndarray:
    """Spin-wave energy inside |k - center| <= half_width for each center."""
    grid = b.grid
    kx, power = transverse_spectrum(b.values, grid, grid.zeta_weights())
    # Parseval for the continuous FT with dx-scaled FFT: int |f|^2 dX = sum |F|^2 dk / 2pi
    dens = power * grid.dkx / (2 * np.pi)
    return np.array([dens[np.abs(kx - c) <= half_width].sum() for c in centers])


def _check_bands(mp: MultimodeParams, grid: GridSpec):
    sep = abs(mp.p[0] - mp.p[1])
    if not grid.transverse or sep < 4 * grid.dkx:
        raise GridError(
            f"unseparable bands: |p1 - p2| = {sep:.3g} is below four k-bins"
            + ("" if grid.transverse else " (no transverse grid)")
        )
    return sep / 2.0


@dataclass(frozen=True)
class MixingReport:
    departure: float  # |b_joint - b_solo|^2 / |b_solo|^2
    band_leakage: float  # spin-wave energy fraction in the other mode's k band
    cross_signal: float  # energy emitted into component 2 / input energy


def mixing_report(mp: MultimodeParams, grid: GridSpec, a1_in: SignalField, options=None) -> MixingReport:
    p0 = _check_bands(mp, grid)
    zero = SignalField(np.zeros_like(a1_in.values), grid)
    joint = solve_multimode_storage(mp, grid, a1_in, zero, options)
    solo = solve_multimode_storage(mp.select((True, False)), grid, a1_in, zero, options)
    n_solo = norm2(solo.b)
    if n_solo == 0:
        return MixingReport(0.0, 0.0, 0.0)
    diff = SpinWave(joint.b.values - solo.b.values, grid)
    bands = band_energies(joint.b, mp.p, p0 / 2.0)
    total = norm2(joint.b)
    return MixingReport(
        departure=norm2(diff) / n_solo,
        band_leakage=float(bands[1] / total) if total > 0 else 0.0,
        cross_signal=norm2(joint.a2) / norm2(a1_in),
    )


def mixing_metric(mp: MultimodeParams, grid: GridSpec, a1_in: SignalField, options=None) -> float:
    """Fractional change of the stored spin wave caused by the second control.

    Only component 1 is injected; the result with both controls on is compared
    with the result when control 2 is off. Requires transversely separated
    bands.
    """
    return mixing_report(mp, grid, a1_in, options).departure


# --------------------------------------------------------------------------
# two-mode storage with angled controls and joint read-out


def angle_to_p(theta: float, k_c: float, L: float, omega_1m: float) -> float:
    """Spin-wave transverse momentum (units of X^-1) imprinted by a control at ``theta``."""
    return -k_c * math.sin(theta) * transverse_scale(L, omega_1m)


def kx_to_angle(kx, k_s: float, L: float, omega_1m: float):
    """Propagation angle (rad) of a signal component with dimensionless transverse momentum ``kx``."""
    return np.arcsin(np.clip(np.asarray(kx) / (transverse_scale(L, omega_1m) * k_s), -1.0, 1.0))


@dataclass(frozen=True)
class TwoModeGeometry:
    preset: PhysicalPreset
    L: float
    theta: float
    theta_r: float
    k_s: float
    k_c: float

    @classmethod
    def build(cls, theta_deg: float = 3.0, theta_r_deg: float = 3.0, L: float = 1e-3, preset: PhysicalPreset = CS_D2):
        """Signals along z near the preset transition; controls phasematched at +-theta.

        The control wavenumber is |k_s| / cos(theta), i.e. the Stokes shift is
        taken to be the one that phasematches ``theta``.
        """
        theta = math.radians(theta_deg)
        k_s = preset.omega_1m / C_LIGHT
        return cls(preset, L, theta, math.radians(theta_r_deg), k_s, k_s / math.cos(theta))

    @property
    def p0(self) -> float:
        return abs(angle_to_p(self.theta, self.k_c, self.L, self.preset.omega_1m))

    def store_p(self):
        return (
            angle_to_p(self.theta, self.k_c, self.L, self.preset.omega_1m),
            angle_to_p(-self.theta, self.k_c, self.L, self.preset.omega_1m),
        )

    def readout_p(self):
        pr = angle_to_p(self.theta_r, self.k_c, self.L, self.preset.omega_1m)
        return (pr, pr)

    def angle_of(self, kx):
        return kx_to_angle(kx, self.k_s, self.L, self.preset.omega_1m)

    def angle_bin(self, grid: GridSpec) -> float:
        return grid.dkx / (transverse_scale(self.L, self.preset.omega_1m) * self.k_s)


@dataclass(frozen=True)
class TwoModeResult:
    stored: MultimodeState
    retrieved: MultimodeState
    peak_angles_deg: tuple[float, float]
    angle_bin_deg: float
    spectra: dict = field(repr=False)
    storage_efficiency: float = 0.0
    band_energies: tuple[float, float] = (0.0, 0.0)


def two_mode_demo(
    grid: GridSpec,
    geometry: TwoModeGeometry | None = None,
    C_m: float = 2.0,
    q: float = 1.0,
    eps_width: float = 0.12,
    x_width: float = 2.0,
    options: SolverOptions | None = None,
) -> TwoModeResult:
    """Store two components with controls at +-theta, read both out backward at theta_r."""
    from .grid import make_gaussian_input
    from .singlemode import prepare_backward

    geometry = geometry or TwoModeGeometry.build()
    mp = MultimodeParams.dimensionless(C_m, p=geometry.store_p(), q=q)
    a_in = make_gaussian_input(grid, 0.5, eps_width, x_width)
    stored = solve_multimode_storage(mp, grid, a_in, a_in, options)
    ready = prepare_backward(stored.b)
    mp_r = readout_params(mp, geometry.readout_p())
    out = solve_multimode_retrieval(mp_r, grid, ready, (True, True), options)
    spectra = {}
    peaks = []
    for name, comp in (("a1", out.a1), ("a2", out.a2)):
        kx, power = transverse_spectrum(comp.values, grid, grid.eps_weights())
        spectra[name] = (kx, power)
        peaks.append(float(np.degrees(geometry.angle_of(kx[np.argmax(power)]))))
    n_in = 2 * norm2(a_in)
    bands = band_energies(stored.b, mp.p, geometry.p0 / 2)
    return TwoModeResult(
        stored=stored,
        retrieved=out,
        peak_angles_deg=tuple(peaks),
        angle_bin_deg=math.degrees(geometry.angle_bin(grid)),
        spectra=spectra,
        storage_efficiency=norm2(stored.b) / n_in,
        band_energies=tuple(float(v) for v in bands),
    )
