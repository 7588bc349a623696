"""Single-mode storage and retrieval, readout geometry and the residual phase.

Equations solved (norm-conserving phase convention, see README)::

    d_eps beta = -C exp(-i p X) alpha
    (lap_X / 4q + i d_zeta) alpha = i C exp(i p X) beta

Backward readout is simulated by mirroring the stored spin wave in zeta,
dressing it with the residual phase, and running the same forward solver.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import engine
from .grid import GridError, GridSpec, SignalField, SpinWave, norm2, zero_signal, zero_spin_wave
from .params import C_LIGHT, MemoryParams, ParameterError, PhysicalPreset, params_from_physical, transverse_scale


class Direction(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class SolverOptions:
    absorbing: bool = False
    absorbing_fraction: float = 0.1
    probe_convergence: bool = False
    refine_tolerance: float = 0.05


def _couplings(params: MemoryParams, grid: GridSpec):
    x = grid.x
    g = params.C * np.exp(1j * params.p * x)
    h = params.C * np.exp(-1j * params.p * x)
    g = np.broadcast_to(g, (1, grid.n_zeta, grid.n_x)).astype(complex)
    h = np.broadcast_to(h, (1, grid.n_zeta, grid.n_x)).astype(complex)
    return g, h


def make_propagator(grid: GridSpec, q: float, options: SolverOptions | None = None):
    if not grid.transverse:
        return None
    options = options or SolverOptions()
    mask = None
    if options.absorbing:
        mask = engine.absorbing_mask(grid.x, grid.x_half_width, options.absorbing_fraction)
    return engine.Propagator.paraxial(grid.kx, q, grid.d_zeta, mask)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("solver produced non-finite values")


def _run(params, grid, alpha_in, beta_in, options, record=False):
    g, h = _couplings(params, grid)
    res = engine.march(
        g, h, alpha_in[None], beta_in, grid.d_eps, grid.d_zeta,
        make_propagator(grid, params.q, options), record=record,
    )
    _check_finite(res.alpha_out, res.beta_out)
    return res


def _interp_eps(values: np.ndarray, src: GridSpec, dst: GridSpec) -> np.ndarray:
    from scipy.interpolate import CubicSpline

    return CubicSpline(src.eps, values, axis=0)(dst.eps)


@dataclass(frozen=True)
class StorageResult:
    beta: SpinWave
    alpha_transmitted: SignalField
    eta_storage: float
    status: str = "ok"
    warnings: tuple[str, ...] = ()
    alpha_history: np.ndarray | None = field(default=None, repr=False)
    beta_history: np.ndarray | None = field(default=None, repr=False)


def solve_storage(
    params: MemoryParams,
    grid: GridSpec,
    alpha_in: SignalField,
    options: SolverOptions | None = None,
    record: bool = False,
) -> StorageResult:
    """Read a signal pulse into an initially empty ensemble.

    Returns the spin wave at eps = 1, the transmitted signal at zeta = 1 and
    the storage efficiency. With ``options.probe_convergence`` the run is
    repeated on a 2x refined grid and the status becomes ``"unconverged"``
    when the stored norm moves by more than ``options.refine_tolerance``.
    """
    options = options or SolverOptions()
    if alpha_in.grid != grid:
        raise GridError("input field is not on the solver grid")
    res = _run(params, grid, alpha_in.values, np.zeros((grid.n_zeta, grid.n_x)), options, record)
    beta = SpinWave(res.beta_out, grid)
    n_in = norm2(alpha_in)
    eta = norm2(beta) / n_in if n_in > 0 else 0.0
    status, warnings = "ok", ()
    if options.probe_convergence and n_in > 0:
        fine = grid.refined(2)
        a_fine = _interp_eps(alpha_in.values, grid, fine)
        r2 = _run(params, fine, a_fine, np.zeros((fine.n_zeta, fine.n_x)), options)
        fine_in = norm2(SignalField(a_fine, fine))
        eta_fine = norm2(SpinWave(r2.beta_out, fine)) / fine_in
        change = abs(eta_fine - eta) / max(eta_fine, 1e-300)
        if change > options.refine_tolerance:
            status = "unconverged"
            warnings = (f"storage efficiency changed by {change:.1%} under 2x refinement",)
    return StorageResult(
        beta=beta,
        alpha_transmitted=SignalField(res.alpha_out[0], grid),
        eta_storage=eta,
        status=status,
        warnings=warnings,
        alpha_history=None if res.alpha_history is None else res.alpha_history[0],
        beta_history=res.beta_history,
    )


@dataclass(frozen=True)
class RetrievalResult:
    alpha_out: SignalField
    beta_remaining: SpinWave
    eta_retrieval: float


def solve_retrieval_full(
    params_out: MemoryParams,
    grid: GridSpec,
    beta_in: SpinWave,
    options: SolverOptions | None = None,
) -> RetrievalResult:
    """Retrieval with the leftover spin wave and efficiency reported too."""
    if beta_in.grid != grid:
        raise GridError("spin wave is not on the solver grid")
    res = _run(params_out, grid, np.zeros((grid.n_eps, grid.n_x)), beta_in.values, options)
    out = SignalField(res.alpha_out[0], grid)
    n_in = norm2(beta_in)
    return RetrievalResult(out, SpinWave(res.beta_out, grid), norm2(out) / n_in if n_in > 0 else 0.0)


def solve_retrieval(params_out: MemoryParams, grid: GridSpec, beta_in: SpinWave, options=None) -> SignalField:
    """Output signal at zeta = 1 when the control reads out ``beta_in``."""
    return solve_retrieval_full(params_out, grid, beta_in, options).alpha_out


# --------------------------------------------------------------------------
# Geometry and residual phase


def phasematch_angle(omega_s: float, omega_13: float) -> float:
    """Control angle that removes the longitudinal mismatch: arccos(w_s / (w_s + w_13))."""
    if omega_s <= 0 or omega_13 < 0:
        raise ParameterError("need omega_s > 0 and omega_13 >= 0")
    return math.acos(omega_s / (omega_s + omega_13))


def mismatch(omega_s: float, omega_c: float, theta: float) -> tuple[np.ndarray, float]:
    """Spin-wave momentum k_s - k_c for a signal along z and a control at ``theta``.

    Returns the transverse 2-vector and the z component (rad/m).
    """
    k_s = omega_s / C_LIGHT
    k_c = omega_c / C_LIGHT
    return np.array([-k_c * math.sin(theta), 0.0]), k_s - k_c * math.cos(theta)


@dataclass(frozen=True)
class ReadoutGeometry:
    """Read-in and read-out wavevector bookkeeping.

    The read-out mismatch is expressed in the read-out frame (its own
    propagation axis), as in the residual-phase formula. ``gamma_r`` and
    ``delta_r`` default to the read-in values when ``None``.
    """

    direction: Direction = Direction.BACKWARD
    theta_r: float = 0.0
    omega_c_r: float | None = None
    dk_perp: tuple[float, float] = (0.0, 0.0)
    dk_z: float = 0.0
    dk_perp_r: tuple[float, float] = (0.0, 0.0)
    dk_z_r: float = 0.0
    gamma_r: float | None = None
    delta_r: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))

    @classmethod
    def from_angles(
        cls,
        omega_s: float,
        omega_c: float,
        theta_c: float,
        theta_r: float,
        direction: Direction | str = Direction.BACKWARD,
        omega_c_r: float | None = None,
        gamma_r: float | None = None,
        delta_r: float | None = None,
    ) -> "ReadoutGeometry":
        """Geometry for a read-in control at ``theta_c`` and a read-out control at ``theta_r``.

        The retrieved signal keeps the Raman shift of the read-in, so its
        frequency is ``omega_c_r - (omega_c - omega_s)``.
        """
        omega_c_r = omega_c if omega_c_r is None else omega_c_r
        perp, dz = mismatch(omega_s, omega_c, theta_c)
        omega_s_r = omega_c_r - (omega_c - omega_s)
        perp_r, dz_r = mismatch(omega_s_r, omega_c_r, theta_r)
        return cls(
            direction=Direction(direction),
            theta_r=theta_r,
            omega_c_r=omega_c_r,
            dk_perp=tuple(perp),
            dk_z=dz,
            dk_perp_r=tuple(perp_r),
            dk_z_r=dz_r,
            gamma_r=gamma_r,
            delta_r=delta_r,
        )


def _chi(omega_tau: float, kappa2: float, z: np.ndarray, Gamma: complex) -> np.ndarray:
    """Stark-shift / group-velocity exponent [omega(tau) + |kappa|^2 z] / Gamma."""
    return (omega_tau + kappa2 * z) / Gamma


def residual_phase(
    geom: ReadoutGeometry,
    params: MemoryParams,
    grid: GridSpec,
    *,
    transverse: bool = True,
    include_chi: bool = True,
) -> np.ndarray:
    """Complex phase phi(zeta, X) relating the stored spin wave to the read-out mode.

    For backward read-out::

        phi = s (dk_perp + dk_perp_r).rho + (dk_z + dk_z_r) L zeta
              + chi[T, L zeta] - chi_r[0, L (1 - zeta)]

    with ``s`` the metres-per-unit of X. Forward read-out uses the same
    bookkeeping with the read-out terms entering with the opposite sign and
    ``chi_r`` evaluated at ``L zeta``. Pass ``transverse=False`` when the
    transverse control momenta are already carried by the solver couplings.
    ``include_chi=False`` keeps only the wavevector (geometric) terms.

    Returns an array of shape (n_zeta, n_x).
    """
    if not params.has_physical:
        raise ParameterError("residual phase needs the physical parameters (gamma, delta, d, L, omega_T)")
    L = params.L
    zeta = grid.zeta[:, None]
    Gamma = params.Gamma
    gamma_r = params.gamma if geom.gamma_r is None else geom.gamma_r
    delta_r = params.delta if geom.delta_r is None else geom.delta_r
    Gamma_r = complex(delta_r, -gamma_r)
    if Gamma == 0 or Gamma_r == 0:
        raise ParameterError("Gamma = Delta - i gamma must be nonzero")
    kappa2 = params.kappa2
    backward = geom.direction is Direction.BACKWARD
    sign = 1.0 if backward else -1.0

    phi = (geom.dk_z + sign * geom.dk_z_r) * L * zeta + 0j * zeta
    if include_chi:
        z_r = L * (1.0 - zeta) if backward else L * zeta
        phi = phi + _chi(params.omega_T, kappa2, L * zeta, Gamma) - _chi(0.0, kappa2, z_r, Gamma_r)
    phi = np.broadcast_to(phi, (grid.n_zeta, grid.n_x)).astype(complex)
    if transverse and grid.transverse:
        s = transverse_scale(L, params.omega_1m)
        kx = geom.dk_perp[0] + sign * geom.dk_perp_r[0]
        phi = phi + s * kx * grid.x[None, :]
    return phi


def prepare_backward(beta: SpinWave, phi: np.ndarray | float = 0.0) -> SpinWave:
    """Dress the stored spin wave with exp(i phi) and mirror it in zeta.

    ``phi`` is given in the read-in frame; the result is in the read-out frame.
    """
    phase = np.exp(1j * np.asarray(phi))
    return SpinWave((beta.values * phase)[::-1], beta.grid)


def prepare_forward(beta: SpinWave, phi: np.ndarray | float = 0.0) -> SpinWave:
    return SpinWave(beta.values * np.exp(1j * np.asarray(phi)), beta.grid)


# --------------------------------------------------------------------------
# Full store -> readout chain


@dataclass(frozen=True)
class EfficiencyResult:
    nu: float
    eta_storage: float
    eta_retrieval: float
    alpha_out: SignalField = field(repr=False)
    beta_stored: SpinWave = field(repr=False)
    warnings: tuple[str, ...] = ()


def roundtrip(
    params_in: MemoryParams,
    params_out: MemoryParams,
    geom: ReadoutGeometry | None,
    grid: GridSpec,
    alpha_in: SignalField | None = None,
    options: SolverOptions | None = None,
) -> EfficiencyResult:
    """Store, apply the read-out frame change, retrieve.

    ``geom=None`` means backward read-out with no residual phase. Without
    ``alpha_in`` the optimal storage input is used (see :mod:`qmem.modes`).
    """
    if alpha_in is None:
        from .modes import optimal_input

        alpha_in = optimal_input(params_in, grid)
    stored = solve_storage(params_in, grid, alpha_in, options)
    if geom is None:
        ready = prepare_backward(stored.beta)
    else:
        phi = residual_phase(geom, params_in, grid, transverse=False)
        if geom.direction is Direction.BACKWARD:
            ready = prepare_backward(stored.beta, phi)
        else:
            ready = prepare_forward(stored.beta, phi)
    ret = solve_retrieval_full(params_out, grid, ready, options)
    n_in = norm2(alpha_in)
    nu = norm2(ret.alpha_out) / n_in if n_in > 0 else 0.0
    return EfficiencyResult(
        nu=nu,
        eta_storage=stored.eta_storage,
        eta_retrieval=ret.eta_retrieval,
        alpha_out=ret.alpha_out,
        beta_stored=stored.beta,
        warnings=stored.warnings,
    )


def total_efficiency(params_in, params_out, geom, grid, alpha_in=None, options=None) -> float:
    """Retrieval probability nu for the full store / read-out chain."""
    return roundtrip(params_in, params_out, geom, grid, alpha_in, options).nu


# --------------------------------------------------------------------------
# Read-out scenarios for a physical preset


class Scenario(str, enum.Enum):
    PHASEMATCHED = "phasematched"
    COLINEAR_BACKWARD = "colinear-backward"
    COLINEAR_FORWARD = "colinear-forward"


# Optical depth for the Raman scenarios. With C = 2 this puts the control
# energy at omega(T) ~ 20 Delta, where the chi terms in the residual phase stay
# small (Re slope ~0.4 rad, loss ~1%).
DEFAULT_OPTICAL_DEPTH = 770.0


@dataclass(frozen=True)
class ScenarioSetup:
    params_in: MemoryParams
    params_out: MemoryParams
    geometry: ReadoutGeometry
    theta_c: float


def scenario_setup(
    preset: PhysicalPreset,
    scenario: Scenario | str,
    C_in: float,
    C_out: float,
    *,
    delta: float | None = None,
    pulse_T: float = 250e-12,
    d: float = DEFAULT_OPTICAL_DEPTH,
    L: float | None = None,
) -> ScenarioSetup:
    """Parameters and geometry for one of the three read-out configurations.

    phasematched
        |1> above |3>, both controls at the phasematching angle, backward read-out.
    colinear-backward
        |1> below |3> (conventional ordering), colinear fields, backward read-out.
    colinear-forward
        |1> below |3>, colinear fields, forward read-out.
    """
    scenario = Scenario(scenario)
    delta = preset.delta if delta is None else delta
    L = preset.L if L is None else L
    omega_s = preset.omega_1m + delta
    gamma = preset.gamma
    Gamma2 = delta**2 + gamma**2

    def omega_T_for(C):
        # C^2 = d gamma omega(T) / |Gamma|^2
        return max(C, 1e-300) ** 2 * Gamma2 / (d * gamma)

    if scenario is Scenario.PHASEMATCHED:
        omega_c = omega_s + preset.omega_13
        theta = phasematch_angle(omega_s, preset.omega_13)
        geom = ReadoutGeometry.from_angles(omega_s, omega_c, theta, theta, Direction.BACKWARD)
    else:
        omega_c = omega_s - preset.omega_13
        theta = 0.0
        direction = Direction.BACKWARD if scenario is Scenario.COLINEAR_BACKWARD else Direction.FORWARD
        geom = ReadoutGeometry.from_angles(omega_s, omega_c, 0.0, 0.0, direction)

    def build(C):
        mp = params_from_physical(preset, delta, omega_T_for(C), pulse_T, theta, d=d, L=L)
        return replace(mp, C=C) if C == 0 else mp

    return ScenarioSetup(build(C_in), build(C_out), geom, theta)
