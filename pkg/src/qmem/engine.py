"""Goursat-problem marcher shared by the single- and two-component solvers.

Solves, on the unit square in (eps, zeta),

    d_zeta a_j = (i / 4q) d_X^2 a_j + g_j(zeta, X) b
    d_eps  b   = - sum_j h_j(zeta, X) a_j

with a_j(eps, zeta=0) and b(eps=0, zeta) given. Both marching directions use
the trapezoidal rule; the transverse Laplacian is integrated exactly in Fourier
space over each zeta step (split step with the source accumulated
trapezoidally around the propagator). At every node the implicit trapezoidal
coupling is pointwise in X and is solved in closed form, so the scheme is the
fixed point of the predictor-corrector iteration and needs no inner loop.

Nodes are swept along anti-diagonals n + k = const (n indexes eps, k zeta):
every node on a diagonal depends only on the previous one, which vectorizes the
sweep over up to min(n_eps, n_zeta) nodes at once.

:func:`march_adjoint` is the exact conjugate transpose of :func:`march` with
respect to the plain Euclidean inner product. It runs the diagonals in reverse
with conjugated coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Propagator:
    """Per-zeta-step diffraction operator, optionally followed by an edge mask."""

    multiplier: np.ndarray  # Fourier-space factor, shape (n_x,)
    mask: np.ndarray | None = None  # real, shape (n_x,)

    @classmethod
    def paraxial(cls, kx: np.ndarray, q: float, d_zeta: float, mask=None) -> "Propagator":
        return cls(np.exp(-1j * kx**2 * d_zeta / (4.0 * q)), mask)

    def apply(self, u: np.ndarray) -> np.ndarray:
        out = np.fft.ifft(np.fft.fft(u, axis=-1) * self.multiplier, axis=-1)
        if self.mask is not None:
            out *= self.mask
        return out

    def apply_adjoint(self, u: np.ndarray) -> np.ndarray:
        if self.mask is not None:
            u = u * self.mask
        return np.fft.ifft(np.fft.fft(u, axis=-1) * np.conj(self.multiplier), axis=-1)


def absorbing_mask(x: np.ndarray, half_width: float, fraction: float = 0.1) -> np.ndarray:
    """Smooth cosine taper over the outer ``fraction`` of the transverse box."""
    edge = fraction * half_width
    inner = half_width - edge
    r = np.abs(x)
    m = np.ones_like(x)
    ramp = r > inner
    m[ramp] = np.cos(0.5 * np.pi * np.clip((r[ramp] - inner) / edge, 0.0, 1.0)) ** 2
    return m


def _diagonal(D: int, n_eps: int, n_zeta: int):
    lo = max(0, D - n_zeta + 1)
    hi = min(n_eps - 1, D)
    n = np.arange(lo, hi + 1)
    return n, D - n


@dataclass
class MarchResult:
    alpha_out: np.ndarray  # (J, n_eps, n_x): a_j at zeta = 1
    beta_out: np.ndarray  # (n_zeta, n_x): b at eps = 1
    alpha_history: np.ndarray | None = None  # (J, n_eps, n_zeta, n_x)
    beta_history: np.ndarray | None = None  # (n_eps, n_zeta, n_x)


def march(
    g: np.ndarray,
    h: np.ndarray,
    alpha_in: np.ndarray,
    beta_in: np.ndarray,
    d_eps: float,
    d_zeta: float,
    prop: Propagator | None = None,
    record: bool = False,
) -> MarchResult:
    """Integrate the coupled system.

    Parameters
    ----------
    g, h : complex arrays of shape (J, n_zeta, n_x)
        Coupling coefficients of the optical and spin-wave equations.
    alpha_in : (J, n_eps, n_x)
        Optical boundary values at zeta = 0.
    beta_in : (n_zeta, n_x)
        Spin wave at eps = 0.
    prop : Propagator or None
        Diffraction over one zeta step; ``None`` disables the Laplacian.
    record : bool
        Keep the full (eps, zeta) history. Memory grows as n_eps * n_zeta * n_x.
    """
    J, n_zeta, n_x = g.shape
    n_eps = alpha_in.shape[1]
    a_prev = np.zeros((J, n_eps, n_x), dtype=complex)
    b_prev = np.zeros((n_eps, n_x), dtype=complex)
    alpha_out = np.zeros((J, n_eps, n_x), dtype=complex)
    beta_out = np.zeros((n_zeta, n_x), dtype=complex)
    a_hist = np.zeros((J, n_eps, n_zeta, n_x), dtype=complex) if record else None
    b_hist = np.zeros((n_eps, n_zeta, n_x), dtype=complex) if record else None
    gh = np.sum(g * h, axis=0)  # (n_zeta, n_x)

    for D in range(n_eps + n_zeta - 1):
        n, k = _diagonal(D, n_eps, n_zeta)
        left = k > 0
        down = n > 0

        A = np.empty((J, n.size, n_x), dtype=complex)
        if left.all():
            nl, kl = n, k - 1
            src = a_prev[:, nl] + (0.5 * d_zeta) * g[:, kl] * b_prev[nl]
            A[:] = prop.apply(src) if prop is not None else src
        else:
            nl, kl = n[left], k[left] - 1
            src = a_prev[:, nl] + (0.5 * d_zeta) * g[:, kl] * b_prev[nl]
            A[:, left] = prop.apply(src) if prop is not None else src
            A[:, ~left] = alpha_in[:, n[~left]]

        hk = h[:, k]
        gk = g[:, k]
        Bk = np.empty((n.size, n_x), dtype=complex)
        nd = n[down] - 1
        Bk[down] = b_prev[nd] - (0.5 * d_eps) * np.sum(hk[:, down] * a_prev[:, nd], axis=0)
        Bk[~down] = beta_in[k[~down]]

        t = np.where(down, 0.5 * d_eps, 0.0)[:, None]
        s = np.where(left, 0.5 * d_zeta, 0.0)[:, None]
        denom = 1.0 + t * s * gh[k]
        b_new = (Bk - t * np.sum(hk * A, axis=0)) / denom
        a_new = A + s * gk * b_new

        a_prev[:, n] = a_new
        b_prev[n] = b_new
        top = k == n_zeta - 1
        if top.any():
            alpha_out[:, n[top]] = a_new[:, top]
        last = n == n_eps - 1
        if last.any():
            beta_out[k[last]] = b_new[last]
        if record:
            a_hist[:, n, k] = a_new
            b_hist[n, k] = b_new

    return MarchResult(alpha_out, beta_out, a_hist, b_hist)


def march_adjoint(
    g: np.ndarray,
    h: np.ndarray,
    alpha_out_bar: np.ndarray,
    beta_out_bar: np.ndarray,
    d_eps: float,
    d_zeta: float,
    prop: Propagator | None = None,
):
    """Conjugate transpose of :func:`march`.

    Maps adjoint outputs ``(alpha_out_bar, beta_out_bar)`` to adjoint inputs
    ``(alpha_in_bar, beta_in_bar)`` so that
    <y, M x> = <M^H y, x> holds to rounding for the Euclidean inner product.
    """
    J, n_zeta, n_x = g.shape
    n_eps = alpha_out_bar.shape[1]
    a_cur = np.zeros((J, n_eps, n_x), dtype=complex)
    b_cur = np.zeros((n_eps, n_x), dtype=complex)
    alpha_in_bar = np.zeros((J, n_eps, n_x), dtype=complex)
    beta_in_bar = np.zeros((n_zeta, n_x), dtype=complex)
    gc = np.conj(g)
    hc = np.conj(h)
    ghc = np.conj(np.sum(g * h, axis=0))

    for D in range(n_eps + n_zeta - 2, -1, -1):
        n, k = _diagonal(D, n_eps, n_zeta)
        left = k > 0
        down = n > 0
        a_nxt = np.zeros_like(a_cur)
        b_nxt = np.zeros_like(b_cur)

        abar = a_cur[:, n].copy()
        bbar = b_cur[n].copy()
        top = k == n_zeta - 1
        if top.any():
            abar[:, top] += alpha_out_bar[:, n[top]]
        last = n == n_eps - 1
        if last.any():
            bbar[last] += beta_out_bar[k[last]]

        t = np.where(down, 0.5 * d_eps, 0.0)[:, None]
        s = np.where(left, 0.5 * d_zeta, 0.0)[:, None]
        # a_new = A + s g b_new
        Abar = abar
        bbar = bbar + s * np.sum(gc[:, k] * abar, axis=0)
        # b_new = (Bk - t sum h A) / denom
        Bbar = bbar / (1.0 + t * s * ghc[k])
        Abar = Abar - t * hc[:, k] * Bbar

        # Bk = b(n-1, k) - (d_eps/2) sum h a(n-1, k)   or beta_in
        nd = n[down] - 1
        b_nxt[nd] += Bbar[down]
        a_nxt[:, nd] += -(0.5 * d_eps) * hc[:, k[down]] * Bbar[down]
        if (~down).any():
            beta_in_bar[k[~down]] += Bbar[~down]

        # A = P(a(n, k-1) + (d_zeta/2) g(k-1) b(n, k-1))   or alpha_in
        nl, kl = n[left], k[left] - 1
        Y = Abar[:, left]
        if prop is not None:
            Y = prop.apply_adjoint(Y)
        a_nxt[:, nl] += Y
        b_nxt[nl] += (0.5 * d_zeta) * np.sum(gc[:, kl] * Y, axis=0)
        if (~left).any():
            alpha_in_bar[:, n[~left]] += Abar[:, ~left]

        a_cur, b_cur = a_nxt, b_nxt

    return alpha_in_bar, beta_in_bar
