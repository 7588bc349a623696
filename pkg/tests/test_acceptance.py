"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines are repeated in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from qmem import engine
from qmem.design import (
    QUOTED_MODE_COUNT,
    QUOTED_STORAGE_TIME,
    DesignInput,
    design_report,
    mode_count,
    motional_fidelity,
    required_density,
)
from qmem.grid import GridSpec, SignalField, l2_distance, make_gaussian_input, norm2
from qmem.modes import (
    LinearMap,
    assemble_dense_map,
    optimal_retrieval_mode,
    optimal_storage_mode,
    power_iteration,
    weighted_singular_values,
)
from qmem.multimode import (
    MultimodeParams,
    TwoModeGeometry,
    band_energies,
    mixing_metric,
    solve_multimode_storage,
    two_mode_demo,
)
from qmem.params import C_LIGHT, CS_D2, TWO_PI, MemoryParams
from qmem.singlemode import phasematch_angle, residual_phase, roundtrip, scenario_setup, solve_storage

ORACLE = json.loads((Path(__file__).parent / "data" / "oracle_values.json").read_text())
G256 = GridSpec(256, 256, 1)
G_TWO_MODE = GridSpec(128, 128, 256, 16.0)


def _scenario_nu(name):
    s = scenario_setup(CS_D2, name, 2.0, 2.0)
    t0 = time.perf_counter()
    nu = roundtrip(s.params_in, s.params_out, s.geometry, G256).nu
    return nu, time.perf_counter() - t0


def ac1():
    nu, dt = _scenario_nu("phasematched")
    return abs(nu - 0.95) <= 0.05 and dt < 120, f"phasematched backward nu={nu:.4f} (0.95 +- 0.05), {dt:.1f} s"


def ac2():
    nu, _ = _scenario_nu("colinear-backward")
    return abs(nu - 0.23) <= 0.10, f"colinear backward nu={nu:.4f} (0.23 +- 0.10)"


def ac3():
    nu, _ = _scenario_nu("colinear-forward")
    return abs(nu - 0.52) <= 0.05, f"colinear forward nu={nu:.4f} (0.52 +- 0.05)"


def _store_defect(C, n, alpha_of_eps):
    g = GridSpec(n, n, 1)
    a = alpha_of_eps(g.eps)
    a = a / np.sqrt(np.sum(g.eps_weights() * abs(a) ** 2))
    cpl = np.full((1, n, 1), C, complex)
    r = engine.march(cpl, cpl, a[None, :, None], np.zeros((n, 1)), g.d_eps, g.d_zeta)
    out = np.sum(g.eps_weights() * abs(r.alpha_out[0, :, 0]) ** 2)
    stored = np.sum(g.zeta_weights() * abs(r.beta_out[:, 0]) ** 2)
    return abs(1.0 - out - stored)


def ac4():
    rng = np.random.default_rng(2024)
    # smooth random input: seeded sum of complex Gaussians
    centers, widths = rng.uniform(0.2, 0.8, 4), rng.uniform(0.05, 0.15, 4)
    amps = rng.standard_normal(4) + 1j * rng.standard_normal(4)

    def smooth(e):
        return sum(a * np.exp(-((e - c) ** 2) / (2 * w**2)) for a, c, w in zip(amps, centers, widths))

    worst, min_order, noise_worst = 0.0, math.inf, 0.0
    for C in (0.5, 1.0, 2.0):
        d = [_store_defect(C, n, smooth) for n in (64, 128, 256)]
        worst = max(worst, d[-1])
        min_order = min(min_order, *np.log2(np.array(d[:-1]) / np.array(d[1:])))
        noise = np.random.default_rng(7)
        noise_worst = max(
            noise_worst,
            _store_defect(C, 256, lambda e: noise.standard_normal(e.size) + 1j * noise.standard_normal(e.size)),
        )
    ok = worst < 1e-3 and noise_worst < 1e-3 and min_order > 1.8
    return ok, f"max defect smooth={worst:.2e} white-noise={noise_worst:.2e} (<1e-3), min order={min_order:.2f}"


def ac5():
    p = MemoryParams(C=2.0)
    s = optimal_storage_mode(p, G256)
    r = optimal_retrieval_mode(p, G256)
    stored = s.image.scaled(1 / math.sqrt(s.image.norm2()))
    d = l2_distance(r.mode, stored.mirrored(), align_phase=True)
    return d < 1e-2, f"L2(retrieval mode, mirrored stored mode)={d:.2e} (<1e-2)"


def ac6():
    g = GridSpec(32, 32, 1)
    p = MemoryParams(C=2.0)
    lm = LinearMap(p, g)
    M = assemble_dense_map(p, g)
    s = weighted_singular_values(M, lm.w_in, lm.w_out)
    r = power_iteration(lm)
    rng = np.random.default_rng(6)
    err_apply = 0.0
    for _ in range(5):
        v = rng.standard_normal(lm.in_shape) + 1j * rng.standard_normal(lm.in_shape)
        err_apply = max(err_apply, np.max(np.abs(M @ v.ravel() - lm.apply(v).ravel())))
    ds = abs(r.sigma - s[0])
    return ds < 1e-6 and err_apply < 1e-10, f"|sigma_power - sigma_svd|={ds:.1e} (<1e-6), |Mv - solver(v)|={err_apply:.1e} (<1e-10)"


def ac7():
    geo = TwoModeGeometry.build()
    p = geo.store_p()
    a = make_gaussian_input(G_TWO_MODE, 0.5, 0.12, 2.0)
    mp = MultimodeParams.dimensionless(2.0, p=p)
    both = solve_multimode_storage(mp, G_TWO_MODE, a, a)
    bands = band_energies(both.b, p, geo.p0 / 2) / norm2(a)
    rel = []
    for j in range(2):
        solo = solve_storage(MemoryParams(C=2.0 * abs(mp.c[j]), p=-p[j]), G_TWO_MODE, a).eta_storage
        rel.append(abs(bands[j] - solo) / solo)
    m2 = mixing_metric(mp, G_TWO_MODE, a)
    m15 = mixing_metric(MultimodeParams.dimensionless(15.0, p=p), G_TWO_MODE, a)
    ok = max(rel) < 0.01 and m15 >= 10 * m2
    return ok, f"per-mode deviation={max(rel):.2e} (<1%), mixing C_m=2: {m2:.2e}, C_m=15: {m15:.2e} (ratio {m15 / m2:.0f} >= 10)"


def ac8():
    geo = TwoModeGeometry.build()
    a = make_gaussian_input(G_TWO_MODE, 0.5, 0.12, 2.0)
    s = math.sqrt(0.5)
    mp = MultimodeParams.dimensionless(2.0, c=(s, -s), p=(geo.store_p()[0],) * 2)
    eta = norm2(solve_multimode_storage(mp, G_TWO_MODE, a, a).b) / (2 * norm2(a))
    return eta < 0.05, f"storage efficiency with relative phase pi={eta:.2e} (<5%)"


def ac9():
    r = two_mode_demo(G_TWO_MODE)
    a1, a2 = r.peak_angles_deg
    ok = abs(a1) <= r.angle_bin_deg and abs(a2 - 6.0) <= r.angle_bin_deg
    return ok, f"output peaks at {a1:.3f} deg and {a2:.3f} deg (0 and 6 within bin {r.angle_bin_deg:.3f} deg)"


def ac10():
    ws = CS_D2.omega_1m + CS_D2.delta
    th = phasematch_angle(ws, CS_D2.omega_13)
    n = required_density(250e-12)
    ref = ORACLE["design"]
    f_err = max(
        abs(motional_fidelity(DesignInput(T_e=float(k.split(":")[0]), t_s=float(k.split(":")[1])), th) - v)
        for k, v in ref["fidelity"].items()
    )
    m_ok = all(
        mode_count(DesignInput(L=float(k.split(":")[0]), A=float(k.split(":")[1]), delta_max=TWO_PI * float(k.split(":")[2]))) == v
        for k, v in ref["mode_count"].items()
    )
    rep = design_report(DesignInput()).to_dict()
    echoed = rep["max_storage_time_quoted"] == QUOTED_STORAGE_TIME == 200e-9 and rep["mode_count_quoted"] == QUOTED_MODE_COUNT == 100
    ok = 0.4 <= math.degrees(th) <= 0.6 and 1e19 <= n <= 2e19 and f_err < 1e-12 and m_ok and echoed
    return ok, (
        f"theta_c={math.degrees(th):.4f} deg, n(250 ps)={n:.2e}, fidelity err={f_err:.1e}, mode counts match={m_ok}, "
        f"t_s(F=0.9)={rep['max_storage_time'] * 1e9:.1f} ns vs quoted 200 ns, n_m={rep['mode_count']} vs quoted ~100"
    )


def ac11():
    g = GridSpec(8, 256, 1)
    L = CS_D2.L
    slope_ref = ORACLE["design"]["colinear_slope_2cm"]

    def span(name, delta=None, chi=True):
        s = scenario_setup(CS_D2, name, 2.0, 2.0, delta=delta)
        phi = residual_phase(s.geometry, s.params_in, g, transverse=False, include_chi=chi)[:, 0].real
        return phi.max() - phi.min(), phi[-1] - phi[0]

    flat_geom, _ = span("phasematched", chi=False)
    flat_res, _ = span("phasematched", delta=0.0)
    _, col_geom = span("colinear-backward", chi=False)
    _, col_res = span("colinear-backward", delta=0.0)
    raman_disp, _ = span("phasematched")
    col_rel = max(abs(col_geom - slope_ref), abs(col_res - slope_ref)) / slope_ref
    ok = flat_geom < 1e-9 and flat_res < 1e-9 and col_rel < 1e-6
    return ok, (
        f"phasematched Re phi span: wavevector terms {flat_geom:.1e}, full on resonance {flat_res:.1e} (<1e-9); "
        f"colinear slope rel err {col_rel:.1e} vs {slope_ref:.4f} rad (<1e-6); "
        f"Raman (Delta=2pi*10 GHz) dispersive span {raman_disp:.3f} rad"
    )


CRITERIA = {1: ac1, 2: ac2, 3: ac3, 4: ac4, 5: ac5, 6: ac6, 7: ac7, 8: ac8, 9: ac9, 10: ac10, 11: ac11}


def _line(k, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] AC{k}: {detail}"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_acceptance(k):
    from conftest import ACCEPTANCE_LINES

    ok, detail = CRITERIA[k]()
    line = _line(k, ok, detail)
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    failures = 0
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]()
        failures += not ok
        print(_line(k, ok, detail), flush=True)
    sys.exit(1 if failures else 0)
