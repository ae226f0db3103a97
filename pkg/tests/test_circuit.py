import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DELTA_I_REF, Z_REF
from ppres import circuit
from ppres.errors import DomainError, InvalidGeometryError

pos = st.floats(1e-3, 1e3)


def test_kinetic_inductance_examples(design):
    assert circuit.kinetic_inductance(design) == pytest.approx(6.666666666666667e-12, rel=1e-12)
    one_square = circuit.DeviceDesign(1e-3, 1e-6, 1e-6, 50e-9, 500e-9, 11.9, 0.2e-12)
    assert circuit.kinetic_inductance(one_square) == pytest.approx(0.2e-12, rel=1e-15)
    d = circuit.DeviceDesign(1e-3, 5e-6, 1e-6, 50e-9, 500e-9, 11.9, 0.2e-12)
    assert circuit.kinetic_inductance(d) == pytest.approx(1.0e-12, rel=1e-12)


@pytest.mark.parametrize("kw", [
    dict(nanowire_width=0.0), dict(nanowire_length=-1e-6), dict(film_thickness=0.0),
    dict(dielectric_epsilon_r=0.5), dict(sheet_kinetic_inductance=-1e-12),
    dict(nanowire_width=2e-3),
])
def test_design_validation(kw):
    base = dict(capacitor_diameter=1e-3, nanowire_length=10e-6, nanowire_width=300e-9,
                film_thickness=50e-9, dielectric_thickness=500e-9, dielectric_epsilon_r=11.9,
                sheet_kinetic_inductance=0.2e-12)
    base.update(kw)
    with pytest.raises(InvalidGeometryError):
        circuit.DeviceDesign(**base)


def test_current_zpf_examples():
    assert circuit.current_zpf(15.93e-12, 7.5e9) == pytest.approx(DELTA_I_REF, rel=1e-12)
    assert circuit.current_zpf(15.93e-12, 7.5e9) == pytest.approx(394.9e-9, rel=2e-3)
    assert circuit.current_zpf(50e-12, 5e9) == pytest.approx(1.82017446279196e-07, rel=1e-12)
    assert circuit.current_zpf(4 * 15.93e-12, 7.5e9) == pytest.approx(DELTA_I_REF / 2, rel=1e-12)


def test_impedance_examples():
    assert circuit.impedance(7.5e9, 394.9e-9) == pytest.approx(0.751, rel=1e-3)
    assert circuit.impedance(7.5e9, 2 * 394.9e-9) == pytest.approx(
        circuit.impedance(7.5e9, 394.9e-9) / 4, rel=1e-14)
    assert circuit.impedance(7.5e9, DELTA_I_REF) == pytest.approx(Z_REF, rel=1e-12)


def test_galvanic_q():
    assert circuit.galvanic_coupling_q(0.7508, 50) == pytest.approx(66.6, rel=1e-3)
    assert circuit.galvanic_coupling_q(50, 50) == 1
    assert circuit.galvanic_coupling_q(0.5, 50) == pytest.approx(100)
    with pytest.raises(DomainError):
        circuit.galvanic_coupling_q(0, 50)


def test_filter_coupling():
    k = circuit.filter_coupling_kappa(2 * math.pi * 100e6, 2 * math.pi * 2e9, 2 * math.pi * 10e6)
    assert k / (2 * math.pi) == pytest.approx(24999.8437509765564, rel=1e-10)
    assert circuit.filter_coupling_kappa(0, 1e9, 1e7) == 0
    assert circuit.filter_coupling_kappa(3e6, 0, 1e7) == pytest.approx(4 * 9e12 / 1e7)
    with pytest.raises(DomainError):
        circuit.filter_coupling_kappa(1, 1, 0)


def test_quality_factor_examples():
    q = circuit.quality_factors(2e4, 2e4, 7.5e9)
    assert q.Q_total == pytest.approx(1e4)
    assert circuit.quality_factors(2e4, math.inf, 7.5e9).Q_total == 2e4
    q = circuit.quality_factors(3e4, 1.5e4, 7.5e9)
    assert q.Q_total == pytest.approx(1e4)
    assert q.kappa / (2 * math.pi) == pytest.approx(750e3)


def test_from_pair_all_combinations(params):
    assert params.delta_I == pytest.approx(DELTA_I_REF, rel=1e-12)
    for kw in (dict(f_r=params.f_r, delta_I=params.delta_I), dict(f_r=params.f_r, Z=params.Z),
               dict(L=params.L, delta_I=params.delta_I), dict(L=params.L, Z=params.Z),
               dict(delta_I=params.delta_I, Z=params.Z)):
        p = circuit.CircuitParams.from_pair(L_k=params.L_k, **kw)
        for name in ("f_r", "L", "Z", "delta_I"):
            assert getattr(p, name) == pytest.approx(getattr(params, name), rel=1e-12)
    with pytest.raises(DomainError):
        circuit.CircuitParams.from_pair(L_k=1e-12, f_r=1e9)


@settings(max_examples=1000, deadline=None)
@given(L=st.floats(1e-13, 1e-8), f=st.floats(1e8, 1e11))
def test_zpf_impedance_roundtrip(L, f):
    dI = circuit.current_zpf(L, f)
    assert circuit.impedance(f, dI) == pytest.approx(2 * math.pi * f * L, rel=1e-12)
    p = circuit.CircuitParams.from_pair(L_k=1e-12, f_r=f, L=L)
    w = p.omega_r
    assert p.Z == pytest.approx(circuit.hbar / 2 * (w / p.delta_I) ** 2, rel=1e-12)
    assert p.L == pytest.approx(circuit.hbar * w / (2 * p.delta_I ** 2), rel=1e-12)


@settings(max_examples=1000, deadline=None)
@given(L=st.floats(1e-13, 1e-8), f=st.floats(1e8, 1e11), k=st.floats(1.01, 10))
def test_zpf_monotonic(L, f, k):
    assert circuit.current_zpf(k * L, f) < circuit.current_zpf(L, f)
    assert circuit.current_zpf(L, k * f) > circuit.current_zpf(L, f)


@settings(max_examples=1000, deadline=None)
@given(qi=st.floats(1, 1e9), qc=st.floats(1, 1e9), f=st.floats(1e8, 1e11))
def test_quality_factor_invariants(qi, qc, f):
    q = circuit.quality_factors(qi, qc, f)
    assert 1 / q.Q_total == pytest.approx(1 / qi + 1 / qc, rel=1e-12)
    assert q.kappa == pytest.approx(2 * math.pi * f / q.Q_total, rel=1e-12)
    assert q.kappa == pytest.approx(q.kappa_c + q.kappa_i, rel=1e-12)
    assert q.kappa_c / q.kappa_i == pytest.approx(qi / qc, rel=1e-12)
    assert min(q.Q_total, q.kappa, q.kappa_c, q.kappa_i) > 0


@settings(max_examples=1000, deadline=None)
@given(g=st.floats(1, 1e9), d=st.floats(0, 1e10), k=st.floats(1e3, 1e9), s=st.floats(1.01, 10))
def test_filter_even_and_decreasing(g, d, k, s):
    a = circuit.filter_coupling_kappa(g, d, k)
    assert a == circuit.filter_coupling_kappa(g, -d, k)
    assert circuit.filter_coupling_kappa(g, s * d + k / 10, k) < a
