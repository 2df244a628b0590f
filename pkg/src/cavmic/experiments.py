"""Signal-to-noise at constant sample damage.

Every scheme is run at the input energy that makes it deposit the same
damage as one single pass of ``reference_input_photons`` through the same
sample. Absorbing samples are compared at equal absorbed photons; lossless
ones (``chi_I < 1e-9``) at equal intensity-weighted sample interactions.
Damage and detected photons are both linear in the input energy, so one
evaluation at the reference input and a single rescaling suffice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .cavity import (
    CavityConfig,
    DamageReport,
    IlluminationSpec,
    cw_damage,
    pulsed_absorption,
    round_trip_phase,
)
from .detection import (
    ALL_MODES,
    DetectionMode,
    DetectionRecord,
    cw_signal,
    mp_signal,
    rd_accumulate,
)
from .materials import (
    BORON_NITRIDE,
    GRAPHENE,
    CarrierSpec,
    MaterialLayer,
    Sample,
    WavelengthSpec,
    sample_coefficients,
    susceptibility,
)

LOSSLESS_CHI_I = 1e-9

# 2 chi_I * 1000 = 26 for a graphene monolayer; see calibrate_wavelength
DEFAULT_WAVELENGTH_NM = 618.685199337186


def default_wavelength() -> WavelengthSpec:
    return WavelengthSpec.from_nm(DEFAULT_WAVELENGTH_NM)


# --- schemes ------------------------------------------------------------------

@dataclass(frozen=True)
class SinglePass:
    name = "single-pass"


@dataclass(frozen=True, eq=False)
class ContinuousWave:
    cavity: CavityConfig
    detuning: float = 0.5
    name = "cw"


@dataclass(frozen=True, eq=False)
class RingDown:
    cavity: CavityConfig
    name = "rd"


@dataclass(frozen=True, eq=False)
class MultiPass:
    cavity: CavityConfig
    m: int = 1
    efficiency: float = 1.0
    name = "mp"

    def __post_init__(self):
        if self.m < 1 or self.m % 2 == 0:
            raise ValueError("multi-pass needs an odd number of passes m >= 1")


Scheme = SinglePass | ContinuousWave | RingDown | MultiPass


@dataclass(frozen=True)
class DamageBudget:
    """Damage allowed per pixel.

    ``target="auto"`` picks absorbed photons for absorbing samples and
    fluence for lossless ones, and sets the value to the sample's own
    single-pass damage at ``reference_input_photons``.
    """

    reference_input_photons: float = 1000.0
    target: str = "auto"
    target_value: float | None = None

    def __post_init__(self):
        if self.target not in ("auto", "absorbed-photons", "fluence-interactions"):
            raise ValueError(f"unknown damage target {self.target!r}")
        if not self.reference_input_photons > 0:
            raise ValueError("reference_input_photons must be positive")

    def functional(self, sample: Sample) -> str:
        if self.target == "absorbed-photons":
            return "absorption"
        if self.target == "fluence-interactions":
            return "fluence"
        return "fluence" if sample.chi.imag < LOSSLESS_CHI_I else "absorption"

    def value_for(self, sample: Sample) -> float:
        if self.target_value is not None:
            return self.target_value
        return damage_functional(SinglePass(), sample, self).value

    def doubled(self, factor: float = 2.0) -> "DamageBudget":
        return DamageBudget(self.reference_input_photons * factor, self.target,
                            None if self.target_value is None else self.target_value * factor)


@dataclass(frozen=True)
class SnrPoint:
    scheme: str
    mode: str
    coord1: float | None
    coord2: float | None
    n1: float
    n2: float
    snr: float
    damage: float
    input_scale: float


@dataclass(frozen=True)
class SweepGrid:
    detuning: np.ndarray = field(default_factory=lambda: np.arange(256) / 256)
    t2: np.ndarray = field(default_factory=lambda: np.logspace(-3, 0, 64, endpoint=False))
    m: np.ndarray = field(default_factory=lambda: np.arange(1, 502, 2))

    def __post_init__(self):
        for name in ("detuning", "t2", "m"):
            v = np.asarray(getattr(self, name))
            object.__setattr__(self, name, v)
            if v.size == 0:
                raise ValueError(f"{name} grid is empty")
            if v.size > 1 and not np.all(np.diff(v) > 0):
                raise ValueError(f"{name} grid must be strictly increasing")
        if np.any(self.m % 2 == 0) or np.any(self.m < 1):
            raise ValueError("multi-pass grid must hold odd m >= 1")
        if np.any((self.detuning < 0) | (self.detuning >= 1)):
            raise ValueError("detuning fractions must lie in [0, 1)")


# --- core evaluation ----------------------------------------------------------

def snr(n1, n2):
    """Shot-noise SNR of the difference of two photon counts; 0 for an all-dark pair."""
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    if np.any(n1 < 0) or np.any(n2 < 0):
        raise ValueError("photon numbers must be non-negative")
    total = n1 + n2
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(total > 0, np.abs(n1 - n2) / np.sqrt(total), 0.0)
    return out[()] if out.ndim == 0 else out


def _illum(budget, regime="short-pulse"):
    return IlluminationSpec(budget.reference_input_photons, regime)


def damage_functional(scheme: Scheme, sample: Sample, budget: DamageBudget = DamageBudget()) -> DamageReport:
    """Damage of ``scheme`` at the budget's reference input energy."""
    coeffs = sample.coeffs
    q = budget.reference_input_photons
    if isinstance(scheme, SinglePass):
        rep = DamageReport(q * coeffs.single_pass_absorption, q)
    elif isinstance(scheme, ContinuousWave):
        phase = round_trip_phase(scheme.detuning, sample.carrier)
        rep = cw_damage(scheme.cavity, coeffs, phase, _illum(budget, "cw"))
    elif isinstance(scheme, RingDown):
        rep = pulsed_absorption(None, scheme.cavity, coeffs, _illum(budget))
    elif isinstance(scheme, MultiPass):
        rep = pulsed_absorption(scheme.m, scheme.cavity, coeffs, _illum(budget))
    else:
        raise TypeError(f"unknown scheme {scheme!r}")
    absorbed = rep.absorbed_photons
    if complex(sample.material.n).imag == 0:
        absorbed = np.zeros_like(np.asarray(absorbed, dtype=float))[()]
    return DamageReport(absorbed, rep.fluence_interactions, budget.functional(sample), rep.tail_bound)


def normalize_input(scheme: Scheme, sample: Sample, budget: DamageBudget = DamageBudget()):
    """Factor on the reference input energy that meets the damage budget."""
    dmg = np.asarray(damage_functional(scheme, sample, budget).value, dtype=float)
    if np.any(dmg <= 0):
        raise ValueError("scheme deposits no damage on this sample; the budget is undefined")
    s = budget.value_for(sample) / dmg
    return s[()] if s.ndim == 0 else s


def detect(scheme: Scheme, sample: Sample, mode, budget: DamageBudget = DamageBudget()) -> DetectionRecord:
    """Detected photon numbers at the reference input energy (not normalised)."""
    mode = DetectionMode.parse(mode)
    coeffs = sample.coeffs
    q = budget.reference_input_photons
    if isinstance(scheme, SinglePass):
        n1 = q * abs(coeffs.t_s - mode.plate_factor * coeffs.t_g) ** 2
        n2 = q * abs(coeffs.t_g) ** 2 if mode.has_reference else 0.0
        return DetectionRecord(n1, n2, mode, "single-pass")
    if isinstance(scheme, ContinuousWave):
        phase = round_trip_phase(scheme.detuning, sample.carrier)
        return cw_signal(mode, scheme.cavity, coeffs, phase, _illum(budget, "cw"))
    if isinstance(scheme, RingDown):
        return rd_accumulate(mode, scheme.cavity, coeffs, _illum(budget))
    if isinstance(scheme, MultiPass):
        return mp_signal(mode, (scheme.m - 1) // 2, scheme.cavity, coeffs, _illum(budget), scheme.efficiency)
    raise TypeError(f"unknown scheme {scheme!r}")


def evaluate(scheme: Scheme, sample: Sample, mode, budget: DamageBudget = DamageBudget(),
             coord1=None, coord2=None) -> SnrPoint:
    """SNR of one scheme at constant damage."""
    mode = DetectionMode.parse(mode)
    s = normalize_input(scheme, sample, budget)
    rec = detect(scheme, sample, mode, budget).scaled(s)
    dmg = damage_functional(scheme, sample, budget).value * s
    return SnrPoint(scheme.name, mode.value, coord1, coord2, float(rec.n1), float(rec.n2),
                    float(snr(rec.n1, rec.n2)), float(dmg), float(s))


def single_pass_reference(sample: Sample, mode, budget: DamageBudget = DamageBudget()) -> SnrPoint:
    """Conventional microscopy: one pass, full detection, no cavity."""
    return evaluate(SinglePass(), sample, mode, budget)


# --- sweeps ---------------------------------------------------------------------

def cw_map(sample: Sample, mode, t2, detuning, budget: DamageBudget = DamageBudget(),
           R1: float = 0.98, output_reflectivity: float = 0.98):
    """Constant-damage CW quantities on a (T2, detuning) grid.

    Returns ``(snr, n1, n2, input_scale, damage)``, each shaped
    ``(len(t2), len(detuning))``.
    """
    t2 = np.asarray(t2, dtype=float)
    det = np.asarray(detuning, dtype=float)
    cavity = CavityConfig.study(t2[:, None], R1, output_reflectivity)
    scheme = ContinuousWave(cavity, det[None, :])
    s = normalize_input(scheme, sample, budget)
    rec = detect(scheme, sample, mode, budget).scaled(s)
    dmg = damage_functional(scheme, sample, budget).value * s
    n1 = np.broadcast_to(rec.n1, s.shape)
    n2 = np.broadcast_to(rec.n2, s.shape)
    return snr(n1, n2), n1, n2, s, dmg


def _cw_snr_at(sample, mode, t2, det, budget, R1, output_reflectivity):
    return float(cw_map(sample, mode, [t2], [det % 1.0], budget, R1, output_reflectivity)[0][0, 0])


def optimal_detuning(sample: Sample, mode, grid: SweepGrid = SweepGrid(), budget: DamageBudget = DamageBudget(),
                     R1: float = 0.98, output_reflectivity: float = 0.98, refine: bool = True):
    """Detuning with the highest SNR over the whole (T2, detuning) grid.

    The grid optimum is refined by a bounded scalar search (golden section
    with parabolic steps) to 1e-6 of a wavelength. Returns
    ``(detuning, t2_at_max, snr_max)``.
    """
    S = cw_map(sample, mode, grid.t2, grid.detuning, budget, R1, output_reflectivity)[0]
    i, j = np.unravel_index(np.argmax(S), S.shape)
    t2, det, best = float(grid.t2[i]), float(grid.detuning[j]), float(S[i, j])
    if refine and grid.detuning.size > 1:
        step = float(np.min(np.diff(grid.detuning)))
        res = minimize_scalar(lambda x: -_cw_snr_at(sample, mode, t2, x, budget, R1, output_reflectivity),
                              bounds=(det - step, det + step), method="bounded",
                              options={"xatol": 1e-6})
        if -res.fun > best:
            det, best = float(res.x % 1.0), float(-res.fun)
    return det, t2, best


def best_detuning(sample: Sample, mode, cavity: CavityConfig, budget: DamageBudget = DamageBudget(),
                  points: int = 256) -> tuple[float, float]:
    """Detuning maximising the constant-damage CW SNR of one cavity, and that SNR."""
    det = np.arange(points) / points
    scheme = ContinuousWave(cavity, det)
    s = normalize_input(scheme, sample, budget)
    rec = detect(scheme, sample, mode, budget).scaled(s)
    S = snr(np.broadcast_to(rec.n1, s.shape), np.broadcast_to(rec.n2, s.shape))
    j = int(np.argmax(S))
    x0, best = float(det[j]), float(S[j])
    res = minimize_scalar(lambda x: -evaluate(ContinuousWave(cavity, x % 1.0), sample, mode, budget).snr,
                          bounds=(x0 - 1 / points, x0 + 1 / points), method="bounded",
                          options={"xatol": 1e-6})
    if -res.fun > best:
        return float(res.x % 1.0), float(-res.fun)
    return x0, best


def cw_rd_ratio(sample: Sample, mode, cavity: CavityConfig, budget: DamageBudget = DamageBudget()) -> float:
    """CW SNR at the optimal detuning over ring-down SNR, same cavity, same damage."""
    cw = best_detuning(sample, mode, cavity, budget)[1]
    return cw / evaluate(RingDown(cavity), sample, mode, budget).snr


def cw_cut(sample: Sample, mode, grid: SweepGrid = SweepGrid(), budget: DamageBudget = DamageBudget(),
           R1: float = 0.98, output_reflectivity: float = 0.98, detuning: float | None = None) -> list[SnrPoint]:
    """SNR versus T2 at the mode's optimal (or a given) detuning."""
    mode = DetectionMode.parse(mode)
    if detuning is None:
        detuning = optimal_detuning(sample, mode, grid, budget, R1, output_reflectivity)[0]
    S, n1, n2, s, dmg = cw_map(sample, mode, grid.t2, [detuning], budget, R1, output_reflectivity)
    return [SnrPoint("cw", mode.value, float(detuning), float(t2), float(n1[i, 0]), float(n2[i, 0]),
                     float(S[i, 0]), float(dmg[i, 0]), float(s[i, 0]))
            for i, t2 in enumerate(grid.t2)]


def rd_sweep(sample: Sample, mode, t2, budget: DamageBudget = DamageBudget(),
             R1: float = 0.98, output_reflectivity: float = 0.98, time_tagged: bool = False) -> list[SnrPoint]:
    mode = DetectionMode.parse(mode)
    out = []
    for T2 in np.asarray(t2, dtype=float):
        scheme = RingDown(CavityConfig.study(float(T2), R1, output_reflectivity))
        if time_tagged:
            s = normalize_input(scheme, sample, budget)
            rec = rd_accumulate(mode, scheme.cavity, sample.coeffs, _illum(budget), time_tagged=True).scaled(s)
            dmg = damage_functional(scheme, sample, budget).value * s
            out.append(SnrPoint("rd", mode.value, float(T2), None, rec.n1, rec.n2, float(rec.snr),
                                float(dmg), float(s)))
        else:
            out.append(evaluate(scheme, sample, mode, budget, coord1=float(T2)))
    return out


def mp_sweep(sample: Sample, mode, m, budget: DamageBudget = DamageBudget(), R: float = 0.98,
             efficiency: float = 1.0) -> list[SnrPoint]:
    """SNR versus the (odd) number of sample passes before outcoupling."""
    mode = DetectionMode.parse(mode)
    m = np.asarray(m, dtype=int)
    if np.any(m % 2 == 0) or np.any(m < 1):
        raise ValueError("multi-pass needs odd m >= 1")
    cavity = CavityConfig.symmetric(R)
    illum = _illum(budget)
    absorbed, fluence = pulsed_absorption(int(m.max()), cavity, sample.coeffs, illum, cumulative=True)
    if complex(sample.material.n).imag == 0:
        absorbed = np.zeros_like(absorbed)
    dmg = (absorbed if budget.functional(sample) == "absorption" else fluence)[m - 1]
    if np.any(dmg <= 0):
        raise ValueError("scheme deposits no damage on this sample; the budget is undefined")
    s = budget.value_for(sample) / dmg
    rec = mp_signal(mode, (m - 1) // 2, cavity, sample.coeffs, illum, efficiency)
    n1, n2 = rec.n1 * s, rec.n2 * s
    S = snr(n1, n2)
    return [SnrPoint("mp", mode.value, float(mi), None, float(a), float(b), float(c), float(d * si), float(si))
            for mi, a, b, c, d, si in zip(m, n1, n2, S, dmg, s)]


def sweep(scheme: str, grid: SweepGrid, sample: Sample, budget: DamageBudget = DamageBudget(),
          modes: Iterable = ALL_MODES, full_map: bool = False) -> list[SnrPoint]:
    """Run one scheme over its grid for every requested mode.

    CW returns the T2 cut at each mode's optimal detuning, or every
    (detuning, T2) point with ``full_map=True``.
    """
    out: list[SnrPoint] = []
    for mode in modes:
        mode = DetectionMode.parse(mode)
        if scheme == "cw":
            if full_map:
                S, n1, n2, s, dmg = cw_map(sample, mode, grid.t2, grid.detuning, budget)
                for i, t2 in enumerate(grid.t2):
                    for j, det in enumerate(grid.detuning):
                        out.append(SnrPoint("cw", mode.value, float(det), float(t2), float(n1[i, j]),
                                            float(n2[i, j]), float(S[i, j]), float(dmg[i, j]), float(s[i, j])))
            else:
                out.extend(cw_cut(sample, mode, grid, budget))
        elif scheme == "rd":
            out.extend(rd_sweep(sample, mode, grid.t2, budget))
        elif scheme == "mp":
            out.extend(mp_sweep(sample, mode, grid.m, budget))
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
    return out


# --- calibration, phase estimation, reference table ---------------------------

def _single_pass_absorbed(material, wavelength, input_photons):
    c = sample_coefficients(material, CarrierSpec.none(), WavelengthSpec(wavelength))
    return c.single_pass_absorption * input_photons


def calibrate_wavelength(material: MaterialLayer = GRAPHENE, target_absorbed: float = 26.0,
                         input_photons: float = 1000.0, bracket: tuple[float, float] = (300e-9, 1200e-9),
                         method: str = "exact") -> WavelengthSpec:
    """Wavelength at which one pass of ``input_photons`` deposits ``target_absorbed``.

    ``method="exact"`` root-finds the full single-pass absorption
    ``1 - |t_s|^2 - |r_sL|^2``; ``method="weak-sample"`` solves
    ``2 chi_I input = target`` in closed form.
    """
    if not target_absorbed > 0:
        raise ValueError("target absorption must be positive")
    if not susceptibility(material, WavelengthSpec(bracket[0])).imag > 0:
        raise ValueError("material does not absorb; nothing to calibrate against")
    if method == "weak-sample":
        n = complex(material.n)
        k = target_absorbed / (2 * input_photons * (n * n).imag / 2 * material.thickness)
        return WavelengthSpec(2 * np.pi / k)
    if method != "exact":
        raise ValueError(f"unknown calibration method {method!r}")

    lo, hi = bracket
    probe = np.linspace(lo, hi, 201)
    vals = np.array([_single_pass_absorbed(material, x, input_photons) for x in probe])
    d = np.diff(vals)
    if not (np.all(d < 0) or np.all(d > 0)):
        raise ValueError("single-pass absorption is not monotone on the bracket")
    f = lambda x: _single_pass_absorbed(material, x, input_photons) - target_absorbed  # noqa: E731
    if f(lo) * f(hi) > 0:
        raise ValueError(f"target {target_absorbed} not reachable within the bracket {bracket}")
    return WavelengthSpec(brentq(f, lo, hi, xtol=1e-22, rtol=4 * np.finfo(float).eps, maxiter=200))


def estimate_phase(N, N_ref, m: int):
    """Phase estimate and shot-noise error from sample and reference counts after m passes."""
    if not np.all(np.asarray(N_ref) > 0):
        raise ValueError("reference count must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    est = (N - N_ref) / (2 * m * N_ref)
    err = np.sqrt(N + N_ref) / (2 * m * N_ref)
    return est, err


def table1_samples(wavelength: WavelengthSpec | None = None) -> dict[str, Sample]:
    wl = wavelength or default_wavelength()
    return {
        "graphene": Sample(GRAPHENE, wl),
        "bn": Sample(BORON_NITRIDE, wl),
        "bn20": Sample(BORON_NITRIDE.scaled(20), wl),
    }


def table1(wavelength: WavelengthSpec | None = None,
           modes: Sequence = ALL_MODES) -> dict[tuple[str, str], float]:
    """Single-pass SNR for the three reference samples and all modes."""
    out = {}
    for name, sample in table1_samples(wavelength).items():
        for mode in modes:
            mode = DetectionMode.parse(mode)
            out[name, mode.value] = single_pass_reference(sample, mode).snr
    return out


def ws_mp_snr_ratio(m, R: float):
    """Weak-sample SNR(m)/SNR(1) for multi-pass imaging at constant damage."""
    m = np.asarray(m, dtype=float)
    return np.sqrt((1 - R) / (1 - R ** m)) * R ** ((m - 1) / 2) * m


def crossing_t2(points: Sequence[SnrPoint]) -> list[float]:
    """T2 values where the signed signal ``n1 - n2`` of a T2 cut changes sign,
    located by linear interpolation in log T2."""
    t2 = np.array([p.coord2 if p.scheme == "cw" else p.coord1 for p in points])
    sig = np.array([p.n1 - p.n2 for p in points])
    out = []
    for i in np.nonzero(np.sign(sig[:-1]) * np.sign(sig[1:]) < 0)[0]:
        x0, x1 = math.log(t2[i]), math.log(t2[i + 1])
        y0, y1 = sig[i], sig[i + 1]
        out.append(math.exp(x0 - y0 * (x1 - x0) / (y1 - y0)))
    return out
