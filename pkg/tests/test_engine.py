"""Marcher checks against closed-form oracles and structural identities."""

import numpy as np
import pytest

from qmem import engine
from qmem.grid import GridSpec


def _couplings(C, n_zeta, n_x, p=0.0, x=None):
    x = np.zeros(n_x) if x is None else x
    g = np.broadcast_to(C * np.exp(1j * p * x), (1, n_zeta, n_x)).astype(complex)
    return g, np.conj(g)


def _rand(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.mark.parametrize("with_prop", [False, True])
def test_adjoint_dot_product(with_prop):
    rng = np.random.default_rng(1)
    grid = GridSpec(9, 7, 16, 3.0)
    g = _rand(rng, 2, 7, 16)
    h = _rand(rng, 2, 7, 16)
    prop = None
    if with_prop:
        prop = engine.Propagator.paraxial(grid.kx, 0.8, grid.d_zeta, engine.absorbing_mask(grid.x, 3.0, 0.25))
    a_in, b_in = _rand(rng, 2, 9, 16), _rand(rng, 7, 16)
    a_bar, b_bar = _rand(rng, 2, 9, 16), _rand(rng, 7, 16)
    r = engine.march(g, h, a_in, b_in, grid.d_eps, grid.d_zeta, prop)
    ai, bi = engine.march_adjoint(g, h, a_bar, b_bar, grid.d_eps, grid.d_zeta, prop)
    lhs = np.vdot(a_bar, r.alpha_out) + np.vdot(b_bar, r.beta_out)
    rhs = np.vdot(ai, a_in) + np.vdot(bi, b_in)
    assert abs(lhs - rhs) < 1e-12 * abs(lhs)


def test_bessel_kernel_oracle(oracle):
    """Storage of a Gaussian pulse matches the J0 Green's-function quadrature."""
    ref = oracle["gaussian_storage"]
    zetas = np.array(ref["zeta"])
    errs = []
    for n in (65, 129, 257):
        grid = GridSpec(n, n, 1)
        alpha = np.exp(-((grid.eps - 0.5) ** 2) / 0.02)[None, :, None]
        g, h = _couplings(2.0, n, 1)
        r = engine.march(g, h, alpha, np.zeros((n, 1)), grid.d_eps, grid.d_zeta)
        idx = np.rint(zetas * (n - 1)).astype(int)
        errs.append(np.max(np.abs(r.beta_out[idx, 0] - np.array(ref["beta"]["2.0"]))))
    assert errs[-1] < 1e-4
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.8)


def test_free_paraxial_gaussian():
    """C = 0: a Gaussian beam follows the closed-form complex-width evolution."""
    q, w = 0.7, 1.0
    grid = GridSpec(3, 201, 256, 16.0)
    prop = engine.Propagator.paraxial(grid.kx, q, grid.d_zeta)
    a0 = np.exp(-grid.x**2 / (2 * w**2))
    alpha = np.broadcast_to(a0, (1, 3, 256)).astype(complex)
    g = np.zeros((1, 201, 256), complex)
    r = engine.march(g, g, alpha, np.zeros((201, 256)), grid.d_eps, grid.d_zeta, prop)
    s = 1 + 1j / (2 * q * w**2)  # at zeta = 1
    exact = np.exp(-grid.x**2 / (2 * w**2 * s)) / np.sqrt(s)
    assert np.max(np.abs(r.alpha_out[0, 1] - exact)) < 1e-10


def test_zero_inputs_give_zero():
    grid = GridSpec(12, 10, 1)
    g, h = _couplings(2.0, 10, 1)
    r = engine.march(g, h, np.zeros((1, 12, 1)), np.zeros((10, 1)), grid.d_eps, grid.d_zeta)
    assert not r.alpha_out.any() and not r.beta_out.any()


def test_record_history_boundaries():
    rng = np.random.default_rng(3)
    grid = GridSpec(6, 5, 1)
    g, h = _couplings(1.5, 5, 1)
    a_in, b_in = _rand(rng, 1, 6, 1), _rand(rng, 5, 1)
    r = engine.march(g, h, a_in, b_in, grid.d_eps, grid.d_zeta, record=True)
    assert np.allclose(r.alpha_history[0, :, 0], a_in[0])
    assert np.allclose(r.beta_history[0], b_in)
    assert np.allclose(r.alpha_history[0, :, -1], r.alpha_out[0])
    assert np.allclose(r.beta_history[-1], r.beta_out)


@pytest.mark.parametrize("C", [0.5, 1.0, 2.0])
def test_conservation_second_order(C):
    defects = []
    for n in (64, 128, 256):
        grid = GridSpec(n, n, 1)
        e = grid.eps
        alpha = (np.exp(-((e - 0.4) ** 2) / 0.02) + 0.5j * np.exp(-((e - 0.7) ** 2) / 0.01)).astype(complex)
        alpha = alpha / np.sqrt(np.sum(grid.eps_weights() * abs(alpha) ** 2))
        g, h = _couplings(C, n, 1)
        r = engine.march(g, h, alpha[None, :, None], np.zeros((n, 1)), grid.d_eps, grid.d_zeta)
        out = np.sum(grid.eps_weights() * abs(r.alpha_out[0, :, 0]) ** 2)
        stored = np.sum(grid.zeta_weights() * abs(r.beta_out[:, 0]) ** 2)
        defects.append(abs(1 - out - stored))
    assert defects[-1] < 1e-3
    assert defects[0] / defects[1] > 3.5 and defects[1] / defects[2] > 3.5


def test_absorbing_mask_shape():
    x = np.linspace(-5, 5, 101)
    m = engine.absorbing_mask(x, 5.0, 0.2)
    assert np.all(m[np.abs(x) <= 4.0] == 1.0)
    assert m[0] == pytest.approx(0.0, abs=1e-15)
    assert np.all((m >= 0) & (m <= 1))
