import math
import time

import numpy as np
import pytest

from cavmic.cavity import CavityConfig
from cavmic.detection import ALL_MODES, DetectionMode
from cavmic.experiments import (
    DEFAULT_WAVELENGTH_NM,
    ContinuousWave,
    DamageBudget,
    MultiPass,
    RingDown,
    SinglePass,
    SweepGrid,
    best_detuning,
    calibrate_wavelength,
    crossing_t2,
    cw_cut,
    cw_map,
    damage_functional,
    default_wavelength,
    estimate_phase,
    evaluate,
    mp_sweep,
    normalize_input,
    optimal_detuning,
    rd_sweep,
    single_pass_reference,
    snr,
    sweep,
    table1,
    ws_mp_snr_ratio,
)
from cavmic.materials import (
    BORON_NITRIDE,
    GRAPHENE,
    CarrierSpec,
    MaterialLayer,
    Sample,
    WavelengthSpec,
    ws_sample_coefficients,
)

WL = default_wavelength()
GR = Sample(GRAPHENE, WL)
BN = Sample(BORON_NITRIDE, WL)
BN20 = Sample(BORON_NITRIDE.scaled(20), WL)
SMALL = SweepGrid(np.arange(64) / 64, np.logspace(-3, 0, 16, endpoint=False), np.arange(1, 42, 2))


# --- snr ------------------------------------------------------------------------

def test_snr_definition():
    assert snr(5.0, 5.0) == 0
    assert snr(974.0, 1000.0) == pytest.approx(0.5852, abs=1e-4)
    assert snr(0.2239, 0.0) == pytest.approx(0.473, abs=1e-3)
    assert snr(0.0, 0.0) == 0
    np.testing.assert_allclose(snr(np.array([1.0, 0.0]), np.array([0.0, 0.0])), [1.0, 0.0])
    with pytest.raises(ValueError):
        snr(-1.0, 2.0)


def test_single_pass_weak_sample_reconstruction():
    # BF graphene: N1 = Q - 2 chi_I Q, N2 = Q, stated to hold within 1%
    q, a = 1000.0, 2 * GR.chi.imag
    ws = a * q / math.sqrt(2 * q - a * q)
    assert single_pass_reference(GR, "bf").snr == pytest.approx(ws, rel=0.01)


def test_single_pass_matches_weak_sample_coefficients():
    # same check with t_s = exp(i chi) instead of its linearisation
    ws = ws_sample_coefficients(GR.chi, CarrierSpec.none(), WL)
    n1 = 1000 * abs(ws.t_s) ** 2
    assert single_pass_reference(GR, "bf").snr == pytest.approx(float(snr(n1, 1000.0)), rel=0.01)


# --- damage ---------------------------------------------------------------------

def test_single_pass_damage():
    g = damage_functional(SinglePass(), GR)
    assert g.mode == "absorption"
    assert g.value == pytest.approx(26, rel=0.03)
    b = damage_functional(SinglePass(), BN)
    assert b.mode == "fluence"
    assert b.absorbed_photons == 0
    assert b.value == 1000


def test_real_index_absorbs_exactly_zero_in_every_scheme():
    cav = CavityConfig.study(0.05)
    for scheme in (ContinuousWave(cav, 0.5), RingDown(cav), MultiPass(CavityConfig.symmetric(0.98), 11)):
        assert damage_functional(scheme, BN20).absorbed_photons == 0


def test_normalize_input():
    assert normalize_input(SinglePass(), GR) == 1
    s = normalize_input(ContinuousWave(CavityConfig.study(0.02), 0.5), GR)
    assert s < 0.1
    with pytest.raises(ValueError, match="no damage"):
        normalize_input(SinglePass(), BN, DamageBudget(target="absorbed-photons"))


def test_doubling_budget_scales_snr_by_sqrt2():
    scheme = RingDown(CavityConfig.study(0.05))
    one = evaluate(scheme, GR, "df")
    two = evaluate(scheme, GR, "df", DamageBudget(target_value=2 * damage_functional(SinglePass(), GR).value))
    assert two.input_scale == pytest.approx(2 * one.input_scale, rel=1e-12)
    assert two.snr == pytest.approx(math.sqrt(2) * one.snr, rel=1e-12)


def test_budget_validation():
    with pytest.raises(ValueError):
        DamageBudget(target="heat")
    with pytest.raises(ValueError):
        DamageBudget(reference_input_photons=0)
    assert DamageBudget(target="fluence-interactions").functional(GR) == "fluence"


@pytest.mark.parametrize("sample", [GR, BN, BN20])
def test_constant_damage_exactness_across_sweeps(sample):
    budget = DamageBudget()
    target = budget.value_for(sample)
    for pts in (sweep("cw", SMALL, sample), sweep("rd", SMALL, sample), sweep("mp", SMALL, sample)):
        for p in pts:
            assert p.damage == pytest.approx(target, rel=1e-9)
            assert p.n1 >= 0 and p.n2 >= 0 and p.damage >= 0
            assert p.snr == pytest.approx(float(snr(p.n1, p.n2)), rel=1e-12)


def test_recomputed_damage_matches_budget():
    cav = CavityConfig.study(0.1)
    for scheme in (ContinuousWave(cav, 0.37), RingDown(cav)):
        p = evaluate(scheme, GR, "bf")
        assert damage_functional(scheme, GR).value * p.input_scale == pytest.approx(26, rel=0.03)
        assert damage_functional(scheme, GR).value * p.input_scale == pytest.approx(
            damage_functional(SinglePass(), GR).value, rel=1e-12)


# --- calibration ----------------------------------------------------------------

def test_calibration_exact_root():
    wl = calibrate_wavelength()
    absorbed = Sample(GRAPHENE, wl).coeffs.single_pass_absorption * 1000
    assert absorbed == pytest.approx(26, abs=1e-6)
    assert abs(wl.wavelength * 1e9 - 618.7) / 618.7 < 0.05


def test_calibration_weak_sample_reproduces_default():
    wl = calibrate_wavelength(method="weak-sample")
    assert wl.wavelength * 1e9 == pytest.approx(DEFAULT_WAVELENGTH_NM, rel=1e-12)
    assert 2 * Sample(GRAPHENE, wl).chi.imag * 1000 == pytest.approx(26, rel=1e-12)


def test_calibration_errors():
    with pytest.raises(ValueError, match="positive"):
        calibrate_wavelength(target_absorbed=0)
    with pytest.raises(ValueError, match="not absorb"):
        calibrate_wavelength(BORON_NITRIDE)
    with pytest.raises(ValueError, match="not reachable"):
        calibrate_wavelength(target_absorbed=500)
    with pytest.raises(ValueError, match="method"):
        calibrate_wavelength(method="guess")


# --- phase estimation -----------------------------------------------------------

def test_estimate_phase():
    est, err = estimate_phase(1000.0, 1000.0, 3)
    assert est == 0
    n_ref = 1e6
    for m in (1, 4, 16):
        _, err = estimate_phase(n_ref, n_ref, m)
        assert err == pytest.approx(1 / (math.sqrt(2 * n_ref) * m), rel=1e-12)
    # constant N_ref * m: error falls like 1/sqrt(m)
    errs = [estimate_phase(1e6 / m, 1e6 / m, m)[1] for m in (1, 4, 16)]
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=1e-12)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(ValueError):
        estimate_phase(1.0, 0.0, 1)
    with pytest.raises(ValueError):
        estimate_phase(1.0, 1.0, 0)


# --- Table 1 ----------------------------------------------------------------------

TABLE1 = {
    ("graphene", "bf"): 0.586, ("graphene", "df"): 0.475, ("graphene", "znk+"): 0.330, ("graphene", "znk-"): 0.322,
    ("bn", "bf"): 3.07e-4, ("bn", "df"): 0.117, ("bn", "znk+"): 0.166, ("bn", "znk-"): 0.166,
    ("bn20", "bf"): 0.122, ("bn20", "df"): 2.34, ("bn20", "znk+"): 3.29, ("bn20", "znk-"): 3.29,
}


def test_table1_within_ten_percent():
    got = table1()
    for key, ref in TABLE1.items():
        assert got[key] == pytest.approx(ref, rel=0.10), key


def test_znk_asymmetry_for_graphene_sign():
    t = table1()
    assert t["graphene", "znk+"] > t["graphene", "znk-"]
    assert t["bn", "znk+"] == pytest.approx(t["bn", "znk-"], rel=1e-5)


# --- sweeps -----------------------------------------------------------------------

def test_cw_map_shape_and_resonance():
    S = cw_map(GR, "bf", SMALL.t2, SMALL.detuning)[0]
    assert S.shape == (16, 64)
    i, j = np.unravel_index(np.argmax(S), S.shape)
    assert SMALL.detuning[j] == pytest.approx(0.5, abs=1 / 64)


def test_cw_resonance_sharper_for_lower_t2():
    det = np.arange(512) / 512
    S = cw_map(GR, "bf", [0.01, 0.2], det)[0]

    def width(row):
        return np.count_nonzero(row > row.max() / 2)

    assert width(S[0]) < width(S[1])


def test_optimal_detuning_refines_grid():
    det, t2, best = optimal_detuning(GR, "bf", SMALL)
    S = cw_map(GR, "bf", SMALL.t2, SMALL.detuning)[0]
    assert best >= S.max()
    assert abs(det - 0.5) < 0.02


def test_cw_cut_uses_mode_optimum():
    pts = cw_cut(GR, "df", SMALL)
    assert len(pts) == len(SMALL.t2)
    assert len({p.coord1 for p in pts}) == 1
    assert all(p.scheme == "cw" and p.mode == "df" for p in pts)


def test_rd_sweep_and_time_tagging():
    plain = rd_sweep(BN, "bf", [0.02, 0.1])
    tagged = rd_sweep(BN, "bf", [0.02, 0.1], time_tagged=True)
    for a, b in zip(plain, tagged):
        assert b.snr > 100 * a.snr
        assert b.coord1 == a.coord1


def test_mp_sweep_rises_then_falls_and_bn_peaks_later():
    m = np.arange(1, 302, 2)
    g = np.array([p.snr for p in mp_sweep(GR, "bf", m)])
    b = np.array([p.snr for p in mp_sweep(BN, "znk+", m)])
    for curve in (g, b):
        k = int(np.argmax(curve))
        assert 0 < k < len(curve) - 1
        assert curve[-1] < curve[k]
    assert m[np.argmax(b)] > m[np.argmax(g)]


def test_mp_scaling_small_ell():
    m = np.arange(1, 22, 2)
    pts = mp_sweep(BN, "znk+", m)
    ratio = np.array([p.snr for p in pts]) / pts[0].snr
    np.testing.assert_allclose(ratio, ws_mp_snr_ratio(m, 0.98), rtol=0.05)
    np.testing.assert_allclose(ratio, np.sqrt(m), rtol=0.15)


def test_mp_rejects_even_m():
    with pytest.raises(ValueError):
        mp_sweep(GR, "bf", [2])
    with pytest.raises(ValueError):
        MultiPass(CavityConfig.symmetric(0.98), 4)


def test_sweep_grid_validation():
    with pytest.raises(ValueError):
        SweepGrid(m=np.array([1, 2, 3]))
    with pytest.raises(ValueError):
        SweepGrid(detuning=np.array([0.5, 0.1]))
    with pytest.raises(ValueError):
        SweepGrid(detuning=np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        sweep("scan", SMALL, GR)


def test_sweep_is_deterministic():
    a = sweep("cw", SMALL, BN, modes=["znk+"])
    b = sweep("cw", SMALL, BN, modes=["znk+"])
    assert a == b


def test_full_map_point_count():
    pts = sweep("cw", SMALL, GR, modes=["bf", "df"], full_map=True)
    assert len(pts) == 2 * 16 * 64


def test_cw_beats_rd_in_weak_regime():
    cav = CavityConfig.lossless_mirrors(0.995, 0.995)
    thin = Sample(MaterialLayer(GRAPHENE.n, GRAPHENE.d * 1e-4), WL)
    cw = best_detuning(thin, "bf", cav)[1]
    rd = evaluate(RingDown(cav), thin, "bf").snr
    assert cw > rd


def test_carrier_moves_cw_optimum_to_zero():
    carrier = CarrierSpec.half_wave(WL, 1.5, 1)
    with_carrier = Sample(GRAPHENE, WL, carrier)
    det0, _, best0 = optimal_detuning(GR, "bf", SMALL)
    det1, _, best1 = optimal_detuning(with_carrier, "bf", SMALL)
    assert abs(det0 - 0.5) < 0.03
    assert min(det1, 1 - det1) < 0.03
    assert best1 < best0


def test_znk_minus_crossing_for_thick_bn():
    grid = SweepGrid(np.arange(256) / 256, np.logspace(-2, 0, 64, endpoint=False), np.array([1]))
    pts = cw_cut(BN20, "znk-", grid)
    cross = crossing_t2(pts)
    assert len(cross) == 1
    assert cross[0] == pytest.approx(0.23, abs=0.05)


def test_sweep_runtime_small_grid():
    t = time.perf_counter()
    sweep("cw", SweepGrid(), GR, modes=["bf"], full_map=True)
    assert time.perf_counter() - t < 60


def test_table1_uses_given_wavelength():
    other = table1(WavelengthSpec(500e-9), modes=[DetectionMode.DF])
    assert set(other) == {("graphene", "df"), ("bn", "df"), ("bn20", "df")}
    assert other["graphene", "df"] != table1()["graphene", "df"]
    assert len(table1()) == 3 * len(ALL_MODES)
