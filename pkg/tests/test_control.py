import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bec_gwsim.constants import BOHR_RADIUS, default_constants
from bec_gwsim.control import (
    FeshbachParams,
    FieldSchedule,
    coupling_strength,
    max_fractional_modulation,
    plan_field_schedule,
    scattering_length,
    scattering_length_first_order,
    simulated_amplitude,
    sound_speed,
    sound_speed_from_coupling,
    strain_from_modulation,
    validate_schedule,
)
from bec_gwsim.errors import DomainError, PlanningError
from bec_gwsim.metric import WaveParams

HBAR = default_constants().hbar
M_NA = 3.817541e-26
NA = FeshbachParams(a_bg=63 * BOHR_RADIUS, B_res=907.0, width=1.0, B_op=0.1)
NEAR = FeshbachParams(a_bg=3e-9, B_res=100.0, width=2.0, B_op=110.0)


def test_coupling_examples():
    assert coupling_strength(2e-9, M_NA) == pytest.approx(2 * coupling_strength(1e-9, M_NA), rel=1e-15)
    a = M_NA / (4 * np.pi * HBAR**2)
    assert coupling_strength(a, M_NA) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(DomainError):
        coupling_strength(-1e-9, M_NA)


def test_sound_speed_examples():
    n = 1e20
    assert sound_speed(n, 4e-9, M_NA) == pytest.approx(2 * sound_speed(n, 1e-9, M_NA), rel=1e-14)
    g = coupling_strength(3e-9, M_NA)
    assert sound_speed_from_coupling(n, g, M_NA) == pytest.approx(sound_speed(n, 3e-9, M_NA), rel=1e-12)


def test_sound_speed_first_order_in_strain():
    n, a, h = 1e20, 3e-9, 1e-4
    exact = sound_speed(n, a * (1 - h), M_NA)
    linear = sound_speed(n, a, M_NA) * (1 - h / 2)
    assert abs(exact - linear) / exact <= 1e-8


@given(st.floats(1e16, 1e22), st.floats(1e-10, 1e-8), st.floats(1.01, 3.0))
def test_sound_speed_monotone(n, a, f):
    c0 = sound_speed(n, a, M_NA)
    assert sound_speed(n * f, a, M_NA) > c0
    assert sound_speed(n, a * f, M_NA) > c0


def test_scattering_length_examples():
    p = NEAR
    assert scattering_length(p.B_res + 1e6 * p.width, p) == pytest.approx(p.a_bg, rel=1e-5)
    assert scattering_length(p.B_res + p.width, p) == 0.0
    assert scattering_length(p.B_res + 2 * p.width, p) == pytest.approx(p.a_bg / 2, rel=1e-15)
    with pytest.raises(DomainError):
        scattering_length(p.B_res, p)


def test_feshbach_invariants():
    with pytest.raises(ValueError):
        FeshbachParams(1e-9, 100.0, 0.0, 110.0)
    with pytest.raises(ValueError):
        FeshbachParams(1e-9, 100.0, 1.0, 100.0)
    with pytest.raises(ValueError):
        FeshbachParams(1e-9, 100.0, 1.0, 101.0)


def test_first_order_scattering_length():
    sched = FieldSchedule(0.0, 3.0, NEAR.B_op)
    t = np.linspace(0, 2, 9)
    np.testing.assert_allclose(scattering_length_first_order(t, sched, NEAR), scattering_length(NEAR.B_op, NEAR))
    gaps = []
    for db in (1e-3, 5e-4):
        s = FieldSchedule(db, 3.0, NEAR.B_op)
        exact = scattering_length(s.field(t), NEAR)
        gaps.append(np.max(np.abs(scattering_length_first_order(t, s, NEAR) - exact)))
    assert 3.5 <= gaps[0] / gaps[1] <= 4.5


def test_linearization_constant():
    # max|a_lin - a_exact| / a(0) <= C delta_b^2 with one C for every amplitude.
    t = np.linspace(0, np.pi, 33)
    a0 = scattering_length(NEAR.B_op, NEAR)
    consts = []
    for delta_b in (3e-5, 1e-4, 3e-4):
        s = FieldSchedule(delta_b, 2.0, NEAR.B_op)
        assert abs(NEAR.prefactor * delta_b) <= 1e-3
        gap = np.max(np.abs(scattering_length_first_order(t, s, NEAR) - scattering_length(s.field(t), NEAR))) / a0
        consts.append(gap / delta_b**2)
    assert max(consts) / min(consts) <= 1.1


def test_prefactor_sign_between_pole_and_zero():
    p = FeshbachParams(3e-9, 100.0, 2.0, 101.0)
    assert p.prefactor < 0
    assert NEAR.prefactor > 0


def test_simulated_amplitude_examples():
    assert simulated_amplitude(0.0, NA) == 0.0
    assert simulated_amplitude(2.0, NA) == pytest.approx(2 * simulated_amplitude(1.0, NA), rel=1e-15)
    a = simulated_amplitude(1.0, NA)
    assert 1e-8 <= a <= 1e-6
    assert a == pytest.approx(0.1 / (906.9 * 907.9), rel=1e-12)
    assert strain_from_modulation(1.0, NA) == -a


def test_plan_round_trip():
    target = WaveParams(1e-7, 2 * np.pi * 100)
    sched = plan_field_schedule(target, NA)
    assert strain_from_modulation(sched.delta_b, NA) == pytest.approx(target.a_plus, rel=1e-12)
    zero = plan_field_schedule(WaveParams(0.0, 3.0), NA)
    assert zero.delta_b == 0.0
    assert validate_schedule(zero, WaveParams(0.0, 3.0), NA).max_relative_deviation == 0.0


def test_plan_validation_scales_quadratically():
    devs = []
    for a in (1e-4, 5e-5):
        target = WaveParams(a, 5.0)
        sched = plan_field_schedule(target, NEAR)
        devs.append(validate_schedule(sched, target, NEAR).max_relative_deviation)
    assert 3.5 <= devs[0] / devs[1] <= 4.5


def test_plan_reproduces_sound_speed_target():
    target = WaveParams(1e-4, 5.0)
    sched = plan_field_schedule(target, NEAR)
    val = validate_schedule(sched, target, NEAR, cs0=2e-3)
    np.testing.assert_allclose(val.sound_speed, 2e-3 * (1 - target.h_plus(val.times) / 2), rtol=1e-7)
    np.testing.assert_allclose(val.h_achieved, val.h_target, atol=1e-7)


def test_plan_refuses_crossing_the_resonance():
    # Far below the resonance the prefactor is ~1e-7, so A = 1e-3 needs |delta_b| ~ 8e3.
    target = WaveParams(1e-3, 1.0)
    with pytest.raises(PlanningError) as info:
        plan_field_schedule(target, NA)
    assert info.value.limit == pytest.approx(max_fractional_modulation(NA))
    assert info.value.limit < 1e-3 / NA.prefactor
