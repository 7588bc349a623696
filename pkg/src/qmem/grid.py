"""Discretization of the dimensionless (eps, zeta, X) domain and the fields living on it.

The longitudinal coordinate ``zeta`` and the integrated-Rabi time ``eps`` both run
over [0, 1] with endpoints included; norms use the trapezoidal rule along them.
The transverse coordinate ``X`` is periodic on [-x_half_width, x_half_width),
so its quadrature weight is simply ``dx``. With ``n_x == 1`` the transverse
direction is dropped and the model is purely longitudinal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Raised for invalid grids or fields that do not fit a grid."""


@dataclass(frozen=True)
class GridSpec:
    n_eps: int = 256
    n_zeta: int = 256
    n_x: int = 1
    x_half_width: float = 12.0

    def __post_init__(self):
        if self.n_eps < 2 or self.n_zeta < 2:
            raise GridError(f"n_eps and n_zeta must be >= 2, got {self.n_eps}, {self.n_zeta}")
        if self.n_x < 1:
            raise GridError(f"n_x must be >= 1, got {self.n_x}")
        if self.n_x > 1 and not self.x_half_width > 0:
            raise GridError("x_half_width must be positive when n_x > 1")

    @property
    def transverse(self) -> bool:
        return self.n_x > 1

    @property
    def d_eps(self) -> float:
        return 1.0 / (self.n_eps - 1)

    @property
    def d_zeta(self) -> float:
        return 1.0 / (self.n_zeta - 1)

    @property
    def dx(self) -> float:
        return 2.0 * self.x_half_width / self.n_x if self.transverse else 1.0

    @property
    def eps(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_eps)

    @property
    def zeta(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_zeta)

    @property
    def x(self) -> np.ndarray:
        if not self.transverse:
            return np.zeros(1)
        return -self.x_half_width + self.dx * np.arange(self.n_x)

    @property
    def kx(self) -> np.ndarray:
        """Angular transverse wavenumbers in FFT order."""
        if not self.transverse:
            return np.zeros(1)
        return 2.0 * np.pi * np.fft.fftfreq(self.n_x, d=self.dx)

    @property
    def dkx(self) -> float:
        return 2.0 * np.pi / (self.n_x * self.dx)

    @property
    def total_points(self) -> int:
        return self.n_eps * self.n_zeta * self.n_x

    def refined(self, factor: int = 2) -> "GridSpec":
        """Grid with every longitudinal spacing divided by ``factor`` (nodes nest)."""
        return GridSpec(
            n_eps=factor * (self.n_eps - 1) + 1,
            n_zeta=factor * (self.n_zeta - 1) + 1,
            n_x=self.n_x,
            x_half_width=self.x_half_width,
        )

    def eps_weights(self) -> np.ndarray:
        return trapezoid_weights(self.n_eps)

    def zeta_weights(self) -> np.ndarray:
        return trapezoid_weights(self.n_zeta)


def trapezoid_weights(n: int) -> np.ndarray:
    w = np.full(n, 1.0 / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SignalField:
    """Signal amplitude on the (eps, X) face at fixed zeta. ``values`` has shape (n_eps, n_x)."""

    values: np.ndarray
    grid: GridSpec = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        expected = (self.grid.n_eps, self.grid.n_x)
        if self.values.shape != expected:
            raise GridError(f"signal field shape {self.values.shape} does not match grid {expected}")

    def weights(self) -> np.ndarray:
        return self.grid.eps_weights()[:, None] * self.grid.dx

    def norm2(self) -> float:
        return norm2(self)

    def scaled(self, factor: complex) -> "SignalField":
        return SignalField(factor * self.values, self.grid)


@dataclass(frozen=True)
class SpinWave:
    """Spin-wave amplitude on (zeta, X). ``values`` has shape (n_zeta, n_x)."""

    values: np.ndarray
    grid: GridSpec = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        expected = (self.grid.n_zeta, self.grid.n_x)
        if self.values.shape != expected:
            raise GridError(f"spin wave shape {self.values.shape} does not match grid {expected}")

    def weights(self) -> np.ndarray:
        return self.grid.zeta_weights()[:, None] * self.grid.dx

    def norm2(self) -> float:
        return norm2(self)

    def scaled(self, factor: complex) -> "SpinWave":
        return SpinWave(factor * self.values, self.grid)

    def mirrored(self) -> "SpinWave":
        """The zeta -> 1 - zeta image."""
        return SpinWave(self.values[::-1], self.grid)


def norm2(f: SignalField | SpinWave) -> float:
    """Trapezoidal approximation of the integral of |f|^2 over its lattice."""
    return float(np.sum(f.weights() * np.abs(f.values) ** 2))


def inner(f, g) -> complex:
    """Weighted inner product <f, g> (conjugate-linear in ``f``)."""
    return complex(np.sum(f.weights() * np.conj(f.values) * g.values))


def l2_distance(f, g, align_phase: bool = False) -> float:
    """L2 distance between two fields of the same kind.

    With ``align_phase`` the global phase of ``g`` is first rotated onto ``f``,
    which is what one wants when comparing singular vectors.
    """
    gv = g.values
    if align_phase:
        ov = inner(g, f)
        if abs(ov) > 0:
            gv = gv * (ov / abs(ov))
    diff = f.values - gv
    return float(np.sqrt(np.sum(f.weights() * np.abs(diff) ** 2)))


def make_gaussian_input(
    grid: GridSpec,
    eps_center: float = 0.5,
    eps_width: float = 0.1,
    x_width: float = 1.0,
    x_center: float = 0.0,
    kx: float = 0.0,
) -> SignalField:
    """Normalized Gaussian input pulse exp[-(eps-eps0)^2/2s_e^2] exp[-X^2/2s_x^2].

    ``kx`` optionally tilts the beam. Raises :class:`GridError` when either width
    is below two grid spacings.
    """
    if eps_width <= 0 or x_width <= 0:
        raise GridError("widths must be positive")
    if not 0.0 <= eps_center <= 1.0:
        raise GridError(f"eps_center must lie in [0, 1], got {eps_center}")
    if eps_width < 2 * grid.d_eps:
        raise GridError(
            f"under-resolved input: eps_width={eps_width} spans fewer than 4 grid points "
            f"(d_eps={grid.d_eps:.3g})"
        )
    if grid.transverse and x_width < 2 * grid.dx:
        raise GridError(
            f"under-resolved input: x_width={x_width} spans fewer than 4 grid points (dx={grid.dx:.3g})"
        )
    e = grid.eps[:, None]
    x = grid.x[None, :]
    values = np.exp(-((e - eps_center) ** 2) / (2 * eps_width**2)).astype(complex)
    if grid.transverse:
        values = values * np.exp(-((x - x_center) ** 2) / (2 * x_width**2) + 1j * kx * x)
    f = SignalField(values, grid)
    return f.scaled(1.0 / np.sqrt(norm2(f)))


def zero_signal(grid: GridSpec) -> SignalField:
    return SignalField(np.zeros((grid.n_eps, grid.n_x)), grid)


def zero_spin_wave(grid: GridSpec) -> SpinWave:
    return SpinWave(np.zeros((grid.n_zeta, grid.n_x)), grid)


def transverse_spectrum(values: np.ndarray, grid: GridSpec, axis_weights: np.ndarray | None = None):
    """Energy per transverse wavenumber, integrated over the longitudinal axis.

    Returns ``(kx, power)`` sorted by increasing ``kx``. ``values`` has the
    transverse direction last.
    """
    if not grid.transverse:
        raise GridError("transverse spectrum needs n_x > 1")
    spec = np.fft.fft(values, axis=-1) * grid.dx
    power = np.abs(spec) ** 2
    if power.ndim > 1:
        w = axis_weights if axis_weights is not None else np.ones(power.shape[0])
        power = np.tensordot(w, power, axes=(0, 0))
    order = np.argsort(grid.kx)
    return grid.kx[order], power[order]
