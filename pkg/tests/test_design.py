import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmem.design import (
    QUOTED_MODE_COUNT,
    QUOTED_STORAGE_TIME,
    DesignInput,
    design_report,
    max_storage_time,
    mode_count,
    motional_fidelity,
    required_density,
    validate_constraints,
)
from qmem.params import TWO_PI, ParameterError

BASE = DesignInput()
TH = BASE.theta_c


def test_phasematch_angle_oracle(oracle):
    assert TH == pytest.approx(oracle["design"]["theta_c"], rel=1e-12)


@pytest.mark.parametrize("key", ["360.0:1e-08", "360.0:4e-08", "300.0:1e-07"])
def test_fidelity_hand_arithmetic(key, oracle):
    Te, ts = (float(v) for v in key.split(":"))
    F = motional_fidelity(DesignInput(T_e=Te, t_s=ts), TH)
    assert F == pytest.approx(oracle["design"]["fidelity"][key], rel=1e-12, abs=1e-12)


def test_fidelity_limits_and_scaling():
    assert motional_fidelity(BASE, TH, 0.0) == 1.0
    l1 = math.log(motional_fidelity(BASE, TH, 20e-9))
    l2 = math.log(motional_fidelity(BASE, TH, 40e-9))
    assert l2 / l1 == pytest.approx(4.0, rel=1e-12)


def test_storage_time_inversion_and_oracle(oracle):
    for F in (0.5, 0.9, 0.999):
        assert motional_fidelity(BASE, TH, max_storage_time(BASE, TH, F)) == pytest.approx(F, abs=1e-12)
    assert max_storage_time(BASE, TH) == pytest.approx(oracle["design"]["t_s_F09"], rel=1e-12)
    assert max_storage_time(BASE, TH, 1 - 1e-15) < 1e-12
    assert max_storage_time(BASE, 0.0) == math.inf
    with pytest.raises(ParameterError):
        max_storage_time(BASE, TH, 1.0)


def test_required_density():
    assert required_density(1.0) == 1.0
    assert required_density(250e-12) == pytest.approx(1.6e19, rel=1e-12)
    assert required_density(500e-12) == pytest.approx(4e18, rel=1e-12)
    with pytest.raises(ParameterError):
        required_density(0.0)


@pytest.mark.parametrize("key", ["0.02:1e-07:0.0", "0.001:1e-07:0.0", "0.001:4e-07:50000000000.0"])
def test_mode_count_hand_arithmetic(key, oracle):
    L, A, dmax = (float(v) for v in key.split(":"))
    n = mode_count(DesignInput(L=L, A=A, delta_max=TWO_PI * dmax))
    assert n == oracle["design"]["mode_count"][key]


def test_mode_count_clamp_and_halving():
    assert mode_count(DesignInput(L=1.0)) == 0
    inp = DesignInput(L=1e-3)
    base = mode_count(inp)
    half = mode_count(DesignInput(L=1e-3, delta_theta=2 * inp.delta_theta))
    assert half in (base // 2, (base + 1) // 2)


@given(st.floats(1e-9, 1e-6), st.floats(1.0, 1000.0), st.floats(1e-4, 0.05))
def test_fidelity_monotone(ts, Te, th):
    inp = DesignInput(T_e=Te, t_s=ts)
    F = motional_fidelity(inp, th)
    assert motional_fidelity(DesignInput(T_e=Te, t_s=ts * 1.1), th) <= F
    assert motional_fidelity(DesignInput(T_e=Te * 1.1, t_s=ts), th) <= F
    assert motional_fidelity(inp, th * 1.1) <= F


@given(st.floats(1e-9, 1e-5), st.floats(1e-4, 1e-1), st.floats(0.0, 1e12))
def test_mode_count_monotone(A, L, dmax):
    inp = DesignInput(A=A, L=L, delta_max=dmax, delta_theta=1e-4)
    n = mode_count(inp)
    assert mode_count(DesignInput(A=A, L=L, delta_max=dmax, delta_theta=2e-4)) <= n
    assert mode_count(DesignInput(A=A * 1.5, L=L, delta_max=dmax, delta_theta=1e-4)) >= n
    assert mode_count(DesignInput(A=A, L=L, delta_max=dmax * 2 + 1e9, delta_theta=1e-4)) >= n


def test_constraints_cesium():
    rep = validate_constraints(BASE, TH)
    assert rep["Tc >> L"].ratio == pytest.approx(250e-12 * 299792458.0 / 0.02, rel=1e-12)
    assert not rep["Tc >> L"].passed
    assert rep["T omega_13 >> 1"].ratio == pytest.approx(250e-12 * TWO_PI * 9.2e9, rel=1e-12)
    assert rep["T omega_13 >> 1"].passed
    zero = validate_constraints(BASE, 0.0)
    assert zero["theta_c << sqrt(Tc/L)"].passed and zero["theta_c << sqrt(A)/L"].passed


def test_constraint_margin_configurable():
    assert validate_constraints(BASE, TH, margin=3.0)["Tc >> L"].passed


def test_report_echoes_quoted_values():
    rep = design_report(BASE).to_dict()
    assert rep["max_storage_time_quoted"] == QUOTED_STORAGE_TIME
    assert rep["mode_count_quoted"] == QUOTED_MODE_COUNT
    assert rep["inputs"]["preset"] == "cs-d2"
    assert design_report(BASE).to_dict() == rep


@pytest.mark.parametrize("kw", [dict(F_min=1.0), dict(pulse_T=0.0), dict(t_s=-1.0), dict(A=-1.0)])
def test_invalid_inputs(kw):
    with pytest.raises(ParameterError):
        DesignInput(**kw)
