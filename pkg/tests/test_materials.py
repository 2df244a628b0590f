import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavmic.materials import (
    ANGSTROM,
    BORON_NITRIDE,
    GRAPHENE,
    CarrierSpec,
    MaterialLayer,
    Sample,
    SampleCoeffs,
    WavelengthSpec,
    carrier_coefficients,
    preset,
    sample_coefficients,
    susceptibility,
    ws_sample_coefficients,
)

from oracles import pixel_coefficients

WL = WavelengthSpec(618.7e-9)


def test_graphene_susceptibility_frozen_value():
    chi = susceptibility(GRAPHENE, WL)
    assert chi.real == pytest.approx(0.00740973088036, rel=1e-10)
    assert chi.imag == pytest.approx(0.0129996890114, rel=1e-10)


def test_bn_susceptibility_real_and_scales_with_layers():
    chi1 = susceptibility(BORON_NITRIDE, WL)
    chi20 = susceptibility(BORON_NITRIDE.scaled(20), WL)
    assert chi1.imag == 0
    assert chi1.real == pytest.approx(0.00378758169091, rel=1e-10)
    assert chi20.real == pytest.approx(20 * chi1.real, rel=1e-14)


def test_vacuum_layer_has_zero_susceptibility_and_unit_transmission():
    vac = preset("vacuum")
    c = sample_coefficients(vac, CarrierSpec.none(), WL)
    assert susceptibility(vac, WL).chi == 0
    assert c.t_s == pytest.approx(1, abs=1e-15)
    assert abs(c.r_sL) < 1e-15


def test_graphene_coefficients_frozen_values():
    c = sample_coefficients(GRAPHENE, CarrierSpec.none(), WL)
    assert c.t_s == pytest.approx(0.987114530487244 + 0.00722051818079295j, abs=1e-13)
    assert c.r_sL == pytest.approx(-0.0128608051802262 + 0.00726429933386776j, abs=1e-13)
    assert c.single_pass_absorption == pytest.approx(0.0253345974635, rel=1e-9)


def test_bn20_power_balance():
    c = sample_coefficients(BORON_NITRIDE.scaled(20), CarrierSpec.none(), WL)
    assert abs(c.t_s) ** 2 == pytest.approx(0.994322403348, rel=1e-10)
    assert abs(c.r_sL) ** 2 == pytest.approx(0.005677596652, rel=1e-8)
    assert c.single_pass_absorption == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("material", [GRAPHENE, BORON_NITRIDE, BORON_NITRIDE.scaled(20)])
@pytest.mark.parametrize("order", [0, 1, 2])
def test_closed_form_matches_characteristic_matrix(material, order):
    carrier = CarrierSpec.half_wave(WL, 1.5, order) if order else CarrierSpec.none()
    c = sample_coefficients(material, carrier, WL)
    t, rL, rR = pixel_coefficients(material.n, material.thickness, WL.k, 1.5, carrier.d_g)
    assert c.t_s == pytest.approx(t, abs=1e-13)
    assert c.r_sL == pytest.approx(rL, abs=1e-13)
    assert c.r_sR == pytest.approx(rR, abs=1e-13)


@settings(max_examples=200, deadline=None)
@given(n_re=st.floats(1.0, 4.0), n_im=st.floats(0.0, 3.0), d=st.floats(0.5, 50.0),
       wl=st.floats(300.0, 1200.0), order=st.integers(0, 3))
def test_closed_form_matches_oracle_random(n_re, n_im, d, wl, order):
    w = WavelengthSpec.from_nm(wl)
    mat = MaterialLayer(complex(n_re, n_im), d * ANGSTROM)
    carrier = CarrierSpec.half_wave(w, 1.5, order) if order else CarrierSpec.none()
    c = sample_coefficients(mat, carrier, w)
    t, rL, rR = pixel_coefficients(mat.n, mat.thickness, w.k, 1.5, carrier.d_g)
    assert abs(c.t_s - t) < 1e-12
    assert abs(c.r_sL - rL) < 1e-12
    assert abs(c.r_sR - rR) < 1e-12


@settings(max_examples=200, deadline=None)
@given(n_re=st.floats(1.0, 4.0), n_im=st.floats(0.0, 3.0), d=st.floats(0.5, 100.0),
       wl=st.floats(300.0, 1200.0))
def test_passive_sample_never_gains_energy(n_re, n_im, d, wl):
    w = WavelengthSpec.from_nm(wl)
    c = sample_coefficients(MaterialLayer(complex(n_re, n_im), d * ANGSTROM), CarrierSpec.none(), w)
    a = c.single_pass_absorption
    assert a >= -1e-14
    if n_im == 0:
        assert a == pytest.approx(0, abs=1e-14)
    assert 1 - abs(c.t_s) ** 2 - abs(c.r_sR) ** 2 == pytest.approx(a, abs=1e-13)


def test_weak_sample_coefficients_agree_to_second_order():
    thin = GRAPHENE.scaled(1)
    for scale in (1e-2, 1e-3):
        mat = MaterialLayer(thin.n, thin.d * scale)
        chi = susceptibility(mat, WL)
        exact = sample_coefficients(mat, CarrierSpec.none(), WL)
        ws = ws_sample_coefficients(chi, CarrierSpec.none(), WL)
        bound = 5 * abs(chi.chi) ** 2
        assert abs(exact.t_s - ws.t_s) < bound
        assert abs(exact.r_sL - ws.r_sL) < bound
        assert abs(exact.r_sR - ws.r_sR) < bound


def test_weak_sample_coefficients_with_carrier():
    mat = MaterialLayer(GRAPHENE.n, GRAPHENE.d * 1e-3)
    carrier = CarrierSpec.half_wave(WL, 1.5, 1)
    chi = susceptibility(mat, WL)
    exact = sample_coefficients(mat, carrier, WL)
    ws = ws_sample_coefficients(chi, carrier, WL)
    assert abs(exact.t_s - ws.t_s) < 5 * abs(chi.chi) ** 2
    assert abs(exact.r_sR - ws.r_sR) < 5 * abs(chi.chi) ** 2 + 2 * WL.k * mat.thickness * abs(chi.chi)


def test_half_wave_carrier_is_transparent():
    for order in (1, 2, 5):
        carrier = CarrierSpec.half_wave(WL, 1.5, order)
        assert carrier.is_non_reflective(WL)
        t_g, r_g = carrier_coefficients(carrier, WL)
        assert r_g == 0
        assert abs(t_g) == pytest.approx(1, rel=1e-15)
        assert WL.k * carrier.d_g == pytest.approx(carrier.phase_thickness, rel=1e-12)


def test_carrier_slab_formula_reduces_at_half_wave():
    c = CarrierSpec.half_wave(WL, 1.5, 1)
    off = CarrierSpec(1.5, c.d_g * (1 + 1e-6), 1)
    t, r = carrier_coefficients(off, WL)
    t0, _ = carrier_coefficients(c, WL)
    assert abs(r) < 1e-5
    assert t == pytest.approx(t0, abs=1e-5)


def test_reflective_carrier_is_rejected():
    bad = CarrierSpec(1.5, 100e-9, 1)
    with pytest.raises(ValueError, match="reflective"):
        sample_coefficients(GRAPHENE, bad, WL)
    with pytest.raises(ValueError, match="reflective"):
        Sample(GRAPHENE, WL, bad)


@pytest.mark.parametrize("kwargs", [dict(n=2 - 1j, d=1e-10), dict(n=2, d=0), dict(n=2, d=1e-10, layers=0),
                                    dict(n=2, d=1e-10, layers=1.5)])
def test_material_validation(kwargs):
    with pytest.raises(ValueError):
        MaterialLayer(**kwargs)


def test_wavelength_and_carrier_validation():
    with pytest.raises(ValueError):
        WavelengthSpec(0)
    with pytest.raises(ValueError):
        CarrierSpec(0.5)
    with pytest.raises(ValueError):
        CarrierSpec(1.5, -1e-9)
    with pytest.raises(KeyError):
        preset("unobtainium")


def test_empty_pixel_coefficients():
    c = SampleCoeffs(0.9, 0.1j, 0.1j, t_g=-1j, r_g=0)
    e = c.empty()
    assert (e.t_s, e.r_sL, e.r_sR) == (-1j, 0, 0)


def test_sample_caches_and_flags_lossless():
    s = Sample(BORON_NITRIDE, WL)
    assert s.is_lossless
    assert not Sample(GRAPHENE, WL).is_lossless
    assert s.coeffs is s.coeffs
    assert np.isclose(s.k, WL.k)
