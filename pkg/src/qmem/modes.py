"""Optimal storage and retrieval modes by singular-mode analysis of the solver maps.

The storage map S takes an input pulse alpha_in(eps, X) to the stored spin wave
beta(zeta, X); the retrieval map R takes a spin wave to the output pulse. Both
are linear. Efficiencies are ratios of trapezoidal norms, so the relevant
singular values are those of W_out^1/2 M W_in^-1/2 where W are the quadrature
weights. The adjoint is applied with :func:`qmem.engine.march_adjoint`, a
reversed sweep with conjugated couplings, so no matrix is ever formed except by
:func:`assemble_dense_map` (a test oracle for small grids).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import engine
from .grid import GridError, GridSpec, SignalField, SpinWave, norm2
from .params import MemoryParams
from .singlemode import SolverOptions, _couplings, make_propagator

SEED = 0x5EED
DENSE_LIMIT = 2**14


class LinearMap:
    """Storage or retrieval map of the single-mode solver, with its exact adjoint."""

    def __init__(self, params: MemoryParams, grid: GridSpec, kind: str = "storage", options=None):
        if kind not in ("storage", "retrieval"):
            raise ValueError(f"kind must be 'storage' or 'retrieval', got {kind!r}")
        self.params = params
        self.grid = grid
        self.kind = kind
        self._g, self._h = _couplings(params, grid)
        self._prop = make_propagator(grid, params.q, options or SolverOptions())
        eps_shape = (grid.n_eps, grid.n_x)
        zeta_shape = (grid.n_zeta, grid.n_x)
        w_eps = grid.eps_weights()[:, None] * grid.dx * np.ones(eps_shape)
        w_zeta = grid.zeta_weights()[:, None] * grid.dx * np.ones(zeta_shape)
        if kind == "storage":
            self.in_shape, self.out_shape = eps_shape, zeta_shape
            self.w_in, self.w_out = w_eps, w_zeta
        else:
            self.in_shape, self.out_shape = zeta_shape, eps_shape
            self.w_in, self.w_out = w_zeta, w_eps

    def apply(self, x: np.ndarray) -> np.ndarray:
        g = self.grid
        if self.kind == "storage":
            r = engine.march(self._g, self._h, x[None], np.zeros((g.n_zeta, g.n_x)), g.d_eps, g.d_zeta, self._prop)
            return r.beta_out
        r = engine.march(self._g, self._h, np.zeros((1, g.n_eps, g.n_x)), x, g.d_eps, g.d_zeta, self._prop)
        return r.alpha_out[0]

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """Euclidean conjugate transpose of :meth:`apply`."""
        g = self.grid
        if self.kind == "storage":
            a_bar, _ = engine.march_adjoint(
                self._g, self._h, np.zeros((1, g.n_eps, g.n_x)), y, g.d_eps, g.d_zeta, self._prop
            )
            return a_bar[0]
        _, b_bar = engine.march_adjoint(self._g, self._h, y[None], np.zeros((g.n_zeta, g.n_x)), g.d_eps, g.d_zeta, self._prop)
        return b_bar

    # Operators in the weight-balanced coordinates u = W^1/2 v.
    def forward_balanced(self, u: np.ndarray) -> np.ndarray:
        return np.sqrt(self.w_out) * self.apply(u / np.sqrt(self.w_in))

    def adjoint_balanced(self, y: np.ndarray) -> np.ndarray:
        return self.adjoint(np.sqrt(self.w_out) * y) / np.sqrt(self.w_in)

    def gram(self, u: np.ndarray) -> np.ndarray:
        return self.adjoint_balanced(self.forward_balanced(u))

    def wrap_in(self, v: np.ndarray):
        return SignalField(v, self.grid) if self.kind == "storage" else SpinWave(v, self.grid)

    def wrap_out(self, v: np.ndarray):
        return SpinWave(v, self.grid) if self.kind == "storage" else SignalField(v, self.grid)


@dataclass(frozen=True)
class ModeResult:
    mode: SignalField | SpinWave
    sigma: float
    iterations: int
    residual: float
    converged: bool = True
    zero_coupling: bool = False
    gap_ratio: float | None = None  # estimate of (sigma_2 / sigma_1)^2
    image: SignalField | SpinWave | None = field(default=None, repr=False)

    @property
    def efficiency(self) -> float:
        return self.sigma**2


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude entry is real and positive."""
    i = np.argmax(np.abs(v))
    if abs(v.flat[i]) == 0:
        return v
    return v * (abs(v.flat[i]) / v.flat[i])


def _random_start(shape, seed=SEED):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return u / np.linalg.norm(u)


def power_iteration(lmap: LinearMap, tol: float = 1e-8, max_iter: int = 500) -> ModeResult:
    """Leading right singular vector of the balanced map by power iteration on M^H M."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    u = _random_start(lmap.in_shape)
    if lmap.params.C == 0:
        v = u / np.sqrt(lmap.w_in)
        return ModeResult(lmap.wrap_in(v), 0.0, 0, 0.0, True, True, None, lmap.wrap_out(np.zeros(lmap.out_shape)))
    sigma_prev = -1.0
    residuals = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        y = lmap.forward_balanced(u)
        sigma = float(np.linalg.norm(y))
        z = lmap.adjoint_balanced(y)
        residuals.append(float(np.linalg.norm(z - sigma**2 * u)))
        nz = np.linalg.norm(z)
        if nz == 0:
            sigma = 0.0
            converged = True
            break
        u = z / nz
        if abs(sigma - sigma_prev) < tol:
            converged = True
            break
        sigma_prev = sigma
    y = lmap.forward_balanced(u)
    sigma = float(np.linalg.norm(y))
    u = _fix_phase(u)
    v = u / np.sqrt(lmap.w_in)
    gap = None
    tail = [r for r in residuals[-4:] if r > 0]
    if len(tail) >= 2:
        gap = float(np.clip(np.mean(np.array(tail[1:]) / np.array(tail[:-1])), 0.0, 1.0))
    image = lmap.apply(v)
    return ModeResult(
        mode=lmap.wrap_in(v),
        sigma=sigma,
        iterations=it,
        residual=residuals[-1] if residuals else 0.0,
        converged=converged,
        gap_ratio=gap,
        image=lmap.wrap_out(image),
    )


def subspace_iteration(lmap: LinearMap, k: int = 4, tol: float = 1e-8, max_iter: int = 300):
    """Top ``k`` (<= 8) singular triplets by block power iteration with Rayleigh-Ritz.

    Returns ``(sigmas, modes, iterations)`` with modes as field objects.
    """
    if not 1 <= k <= 8:
        raise ValueError("subspace iteration supports 1 <= k <= 8")
    n = int(np.prod(lmap.in_shape))
    rng = np.random.default_rng(SEED)
    Q, _ = np.linalg.qr(rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k)))
    prev = np.zeros(k)
    it = 0
    for it in range(1, max_iter + 1):
        Z = np.stack([lmap.gram(Q[:, i].reshape(lmap.in_shape)).ravel() for i in range(k)], axis=1)
        H = Q.conj().T @ Z
        evals, evecs = np.linalg.eigh(0.5 * (H + H.conj().T))
        order = np.argsort(evals)[::-1]
        evals = np.clip(evals[order], 0.0, None)
        sig = np.sqrt(evals)
        Q, _ = np.linalg.qr(Z @ evecs[:, order])
        if np.max(np.abs(sig - prev)) < tol:
            break
        prev = sig
    # final Ritz vectors
    Z = np.stack([lmap.gram(Q[:, i].reshape(lmap.in_shape)).ravel() for i in range(k)], axis=1)
    H = Q.conj().T @ Z
    evals, evecs = np.linalg.eigh(0.5 * (H + H.conj().T))
    order = np.argsort(evals)[::-1]
    U = Q @ evecs[:, order]
    sigmas = np.sqrt(np.clip(evals[order], 0.0, None))
    modes = [lmap.wrap_in(_fix_phase(U[:, i]).reshape(lmap.in_shape) / np.sqrt(lmap.w_in)) for i in range(k)]
    return sigmas, modes, it


def optimal_storage_mode(params: MemoryParams, grid: GridSpec, tol: float = 1e-8, max_iter: int = 500, options=None) -> ModeResult:
    """Input pulse that maximizes the stored fraction; ``image`` is the stored spin wave."""
    return power_iteration(LinearMap(params, grid, "storage", options), tol, max_iter)


def optimal_retrieval_mode(params: MemoryParams, grid: GridSpec, tol: float = 1e-8, max_iter: int = 500, options=None) -> ModeResult:
    """Spin wave that is retrieved most efficiently; ``image`` is the output pulse."""
    return power_iteration(LinearMap(params, grid, "retrieval", options), tol, max_iter)


def optimal_input(params: MemoryParams, grid: GridSpec, x_width: float | None = None) -> SignalField:
    """Unit-norm input used for efficiency runs.

    Longitudinal grids get the numerically optimal temporal mode. With a
    transverse direction the input is that temporal mode times a Gaussian beam
    of width ``x_width`` (default a sixth of the half-width), because the
    transverse singular spectrum is nearly degenerate.
    """
    grid1d = GridSpec(grid.n_eps, grid.n_zeta, 1)
    res = optimal_storage_mode(params if not grid.transverse else _without_p(params), grid1d)
    temporal = res.mode.values[:, 0]
    if not grid.transverse:
        f = SignalField(temporal[:, None], grid)
    else:
        w = grid.x_half_width / 6.0 if x_width is None else x_width
        if w < 2 * grid.dx:
            raise GridError(f"under-resolved beam: x_width={w} with dx={grid.dx:.3g}")
        beam = np.exp(-grid.x**2 / (2 * w**2))
        f = SignalField(temporal[:, None] * beam[None, :], grid)
    n = norm2(f)
    return f.scaled(1.0 / np.sqrt(n)) if n > 0 else f


def _without_p(params: MemoryParams) -> MemoryParams:
    from dataclasses import replace

    return replace(params, p=0.0)


def assemble_dense_map(params: MemoryParams, grid: GridSpec, kind: str = "storage", options=None) -> np.ndarray:
    """Explicit matrix of the storage (or retrieval) map on flattened fields.

    Columns are solver responses to unit impulses. Refuses grids with more than
    2**14 points.
    """
    if grid.total_points > DENSE_LIMIT:
        raise GridError(f"grid has {grid.total_points} points; dense assembly is limited to {DENSE_LIMIT}")
    lmap = LinearMap(params, grid, kind, options)
    n_in = int(np.prod(lmap.in_shape))
    cols = []
    for i in range(n_in):
        e = np.zeros(n_in, dtype=complex)
        e[i] = 1.0
        cols.append(lmap.apply(e.reshape(lmap.in_shape)).ravel())
    return np.stack(cols, axis=1)


def weighted_singular_values(M: np.ndarray, w_in: np.ndarray, w_out: np.ndarray) -> np.ndarray:
    """Singular values of W_out^1/2 M W_in^-1/2 (efficiency-normalized)."""
    B = np.sqrt(w_out.ravel())[:, None] * M / np.sqrt(w_in.ravel())[None, :]
    return np.linalg.svd(B, compute_uv=False)
