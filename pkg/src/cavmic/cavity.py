"""Round-trip algebra of the self-imaging 8f cavity.

A sample pixel sits halfway between two mirrors. Light incident on the
sample plane from the left (``E_L->``) and right (``E_R<-``) is mapped by the
sample matrix ``M_s`` onto the outgoing pair ``(E_L<-, E_R->)``; one further
half round trip through the 4f relays and a mirror bounce closes the loop:

    M = [[r1 r_sL, r1 t_s],
         [r2 t_s,  r2 r_sR]]

All amplitudes are per pixel and relative to the input amplitude; photon
numbers are expressed per ``input_photons = T1 Q_in / (hbar omega)``, the
energy actually injected through the first mirror. Functions broadcast over
numpy arrays wherever that is natural (detuning grids, T2 grids, pass
numbers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .materials import CarrierSpec, SampleCoeffs, Susceptibility

DEGENERACY_RTOL = 1e-12
TRAIN_RTOL = 1e-12
MAX_TRAIN_LENGTH = 5_000_000


@dataclass(frozen=True, eq=False)
class CavityConfig:
    """Mirror parameters of the cavity.

    ``R1, R2`` are intensity reflectivities, ``T1, T2`` transmissions;
    ``R + T < 1`` models extra loss. Amplitudes follow ``r = -sqrt(R)`` and
    ``t = sqrt(T)``. ``R2`` and ``T2`` may be arrays for vectorised sweeps.
    """

    R1: float = 0.98
    R2: float = 0.98
    T1: float | None = None
    T2: float | None = None
    focal_length: float = 0.05
    lossless: bool = False

    def __post_init__(self):
        if self.T1 is None:
            object.__setattr__(self, "T1", 1.0 - np.asarray(self.R1))
        if self.T2 is None:
            object.__setattr__(self, "T2", 1.0 - np.asarray(self.R2))
        for name in ("R1", "R2"):
            v = np.asarray(getattr(self, name))
            if not np.all((v > 0) & (v < 1)):
                raise ValueError(f"{name} out of (0,1)")
        for r, t in (("R1", "T1"), ("R2", "T2")):
            R, T = np.asarray(getattr(self, r)), np.asarray(getattr(self, t))
            if np.any(T < 0) or np.any(R + T > 1 + 1e-12):
                raise ValueError(f"need 0 <= {t} and {r} + {t} <= 1")
        if np.any(np.asarray(self.T1) <= 0):
            raise ValueError("T1 must be positive (no light enters the cavity otherwise)")

    @classmethod
    def study(cls, T2, R1: float = 0.98, output_reflectivity: float = 0.98) -> "CavityConfig":
        """Lossy output mirror ``R2 = output_reflectivity * (1 - T2)``."""
        T2 = np.asarray(T2, dtype=float)
        return cls(R1=R1, R2=output_reflectivity * (1 - T2), T1=1 - R1, T2=T2)

    @classmethod
    def lossless_mirrors(cls, R1: float, R2) -> "CavityConfig":
        R2 = np.asarray(R2, dtype=float)
        return cls(R1=R1, R2=R2, T1=1 - R1, T2=1 - R2, lossless=True)

    @classmethod
    def symmetric(cls, R: float) -> "CavityConfig":
        """Equal mirrors, as used for actively outcoupled multi-pass imaging."""
        return cls(R1=R, R2=R, T1=1 - R, T2=1 - R)

    @property
    def r1(self):
        return -np.sqrt(self.R1)

    @property
    def r2(self):
        return -np.sqrt(self.R2)

    @property
    def t1(self):
        return np.sqrt(self.T1)

    @property
    def t2(self):
        return np.sqrt(self.T2)

    @property
    def mean_roundtrips(self):
        """Empty-cavity mean number of round trips, sqrt(R1R2)/(1-sqrt(R1R2))."""
        x = np.sqrt(np.asarray(self.R1) * np.asarray(self.R2))
        return x / (1 - x)


@dataclass(frozen=True)
class IlluminationSpec:
    """Per-pixel injected photon number ``T1 Q_in / hbar omega``."""

    input_photons: float = 1000.0
    regime: str = "short-pulse"

    def __post_init__(self):
        if not self.input_photons > 0:
            raise ValueError("input_photons must be positive")
        if self.regime not in ("cw", "short-pulse"):
            raise ValueError("regime must be 'cw' or 'short-pulse'")


@dataclass(frozen=True)
class DamageReport:
    """Absorbed photons and intensity-weighted sample interactions.

    ``mode`` records which of the two drives the constant-damage budget.
    """

    absorbed_photons: float
    fluence_interactions: float
    mode: str = "absorption"
    tail_bound: float = 0.0

    @property
    def value(self) -> float:
        return self.absorbed_photons if self.mode == "absorption" else self.fluence_interactions

    def scaled(self, s: float) -> "DamageReport":
        return DamageReport(self.absorbed_photons * s, self.fluence_interactions * s,
                            self.mode, self.tail_bound * s)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """2x2 complex matrix ``[[a, b], [c, d]]``; entries may be arrays."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def sample_map(cls, coeffs: SampleCoeffs) -> "TransferMatrix":
        return cls(coeffs.r_sL, coeffs.t_s, coeffs.t_s, coeffs.r_sR)

    @classmethod
    def round_trip(cls, cavity: CavityConfig, coeffs: SampleCoeffs) -> "TransferMatrix":
        r1, r2 = cavity.r1, cavity.r2
        return cls(r1 * coeffs.r_sL, r1 * coeffs.t_s, r2 * coeffs.t_s, r2 * coeffs.r_sR)

    @classmethod
    def empty_plate(cls, cavity: CavityConfig, coeffs: SampleCoeffs) -> "TransferMatrix":
        return cls.round_trip(cavity, coeffs.empty())

    @property
    def trace(self):
        return self.a + self.d

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other):
        if isinstance(other, TransferMatrix):
            return TransferMatrix(
                self.a * other.a + self.b * other.c,
                self.a * other.b + self.b * other.d,
                self.c * other.a + self.d * other.c,
                self.c * other.b + self.d * other.d,
            )
        x, y = other
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)


class Eigenpair(NamedTuple):
    lambda_plus: complex
    lambda_minus: complex
    degenerate: bool


class FieldPair(NamedTuple):
    """Forward (left-to-right) and backward amplitudes on one side of the sample."""

    fwd: complex
    bwd: complex


def eigenpair(M: TransferMatrix) -> Eigenpair:
    a, b, c, d = (np.asarray(x, dtype=complex) for x in (M.a, M.b, M.c, M.d))
    root = np.sqrt((a - d) ** 2 + 4 * b * c)
    lp = (a + d + root) / 2
    lm = (a + d - root) / 2
    scale = np.maximum(np.abs(lp), np.abs(lm))
    degenerate = np.abs(lp - lm) <= DEGENERACY_RTOL * scale
    if lp.ndim == 0:
        return Eigenpair(complex(lp), complex(lm), bool(degenerate))
    return Eigenpair(lp, lm, degenerate)


def pulse_weight(m, eig: Eigenpair):
    """``(l+^m - l-^m)/(l+ - l-)``, the (m-1)-fold round-trip weight.

    Broadcasts over arrays of ``m``; switches to ``m l^(m-1)`` for degenerate
    eigenvalues.
    """
    m = np.asarray(m)
    if np.any(m < 0):
        raise ValueError("pass number must be >= 0")
    lp = np.asarray(eig.lambda_plus, dtype=complex)
    lm = np.asarray(eig.lambda_minus, dtype=complex)
    deg = np.asarray(eig.degenerate)
    diff = np.where(deg, 1.0, lp - lm)
    g = (lp ** m - lm ** m) / diff
    if np.any(deg):
        lam = (lp + lm) / 2
        with np.errstate(divide="ignore", invalid="ignore"):
            g_deg = np.where(m == 0, 0.0, m * lam ** np.maximum(m - 1, 0))
        g = np.where(deg, g_deg, g)
    return g[()] if g.ndim == 0 else g


def _matrices(cavity, coeffs):
    M = TransferMatrix.round_trip(cavity, coeffs)
    G = TransferMatrix.empty_plate(cavity, coeffs)
    return M, eigenpair(M), G, eigenpair(G)


def pulsed_output_energy(m, cavity: CavityConfig, coeffs: SampleCoeffs,
                         illum: IlluminationSpec = IlluminationSpec()):
    """Photons in the m-th pulse leaking through the output mirror."""
    eig = eigenpair(TransferMatrix.round_trip(cavity, coeffs))
    g = pulse_weight(m, eig)
    return illum.input_photons * cavity.T2 * np.abs(coeffs.t_s * g) ** 2


def train_length(cavity: CavityConfig, coeffs: SampleCoeffs, rtol: float = TRAIN_RTOL) -> int:
    """Number of sample passes after which every pulse carries less than
    ``rtol`` of the injected energy."""
    _, eig, _, eig_g = _matrices(cavity, coeffs)
    rho = float(np.max([np.max(np.abs(x)) for x in (*eig[:2], *eig_g[:2])]))
    if rho >= 1:
        raise ValueError("round-trip eigenvalue of modulus >= 1: no decaying pulse train")
    if rho == 0:
        return 2
    # |g_m|^2 <= m^2 rho^(2m-2); solve m^2 rho^(2m-2) < rtol by stepping
    n = max(2, math.ceil(math.log(rtol) / (2 * math.log(rho))) + 1)
    while n * n * rho ** (2 * n - 2) >= rtol:
        n = int(n * 1.1) + 1
        if n > MAX_TRAIN_LENGTH:
            raise ValueError("pulse train too long to truncate; cavity finesse too high")
    return n


def tail_bound(n: int, cavity: CavityConfig, coeffs: SampleCoeffs) -> float:
    """Upper bound on ``sum_{m > n} m^2 rho^(2m-2)``, the neglected tail of any
    per-pulse energy sum normalised to one injected photon."""
    _, eig, _, eig_g = _matrices(cavity, coeffs)
    rho = float(np.max([np.max(np.abs(x)) for x in (*eig[:2], *eig_g[:2])]))
    x = rho * rho
    q = ((n + 2) / (n + 1)) ** 2 * x
    if q >= 1:
        return math.inf
    return (n + 1) ** 2 * x ** n / (1 - q)


def round_trip_phase(detuning_frac, carrier: CarrierSpec | None = None):
    """``exp(8ikf)`` for a detuning residue ``((8f - d_g) mod lambda)/lambda``."""
    kdg = 0.0 if carrier is None else carrier.phase_thickness
    return np.exp(2j * np.pi * np.asarray(detuning_frac) + 1j * kdg)


def _check_cw(eig):
    if np.any(np.abs(eig.lambda_plus) >= 1) or np.any(np.abs(eig.lambda_minus) >= 1):
        raise ValueError("|lambda| >= 1: the stationary field diverges (unphysical gain)")


def cw_output(cavity: CavityConfig, coeffs: SampleCoeffs, phase):
    """Stationary output amplitude ``E_out/E_in`` behind the second mirror."""
    eig = eigenpair(TransferMatrix.round_trip(cavity, coeffs))
    _check_cw(eig)
    lp, lm = eig.lambda_plus, eig.lambda_minus
    return cavity.t1 * cavity.t2 * coeffs.t_s * phase / ((1 - phase * lp) * (1 - phase * lm))


def cw_sample_fields(cavity: CavityConfig, coeffs: SampleCoeffs, phase) -> tuple[FieldPair, FieldPair]:
    """Stationary amplitudes left and right of the sample, per unit input.

    Returns ``(left, right)`` with ``left = (E_L->, E_L<-)`` and
    ``right = (E_R->, E_R<-)``. The half-trip phase of the injected field is
    dropped, so ``cw_output == phase * t2 * E_R->``.
    """
    eig = eigenpair(TransferMatrix.round_trip(cavity, coeffs))
    _check_cw(eig)
    den = (1 - phase * eig.lambda_plus) * (1 - phase * eig.lambda_minus)
    t, rL, rR = coeffs.t_s, coeffs.r_sL, coeffs.r_sR
    r2 = cavity.r2
    right_fwd = cavity.t1 * t / den
    left_fwd = cavity.t1 * (1 - phase * r2 * rR) / den
    right_bwd = phase * r2 * right_fwd
    left_bwd = rL * left_fwd + t * right_bwd
    return FieldPair(left_fwd, left_bwd), FieldPair(right_fwd, right_bwd)


def cw_absorption(cavity: CavityConfig, coeffs: SampleCoeffs, phase):
    """Absorbed intensity per unit transmitted output intensity, closed form."""
    t, rL, rR = coeffs.t_s, coeffs.r_sL, coeffs.r_sR
    r2 = cavity.r2
    a = np.abs((1 - phase * r2 * rR) / t) ** 2
    b = np.abs((rL + phase * r2 * (t * t - rL * rR)) / t) ** 2
    return (cavity.R2 - 1 + a - b) / cavity.T2


def cw_damage(cavity: CavityConfig, coeffs: SampleCoeffs, phase,
              illum: IlluminationSpec = IlluminationSpec(regime="cw")) -> DamageReport:
    """Absorbed photons and standing-wave fluence at the layer, per detection
    window that injects ``illum.input_photons``."""
    left, right = cw_sample_fields(cavity, coeffs, phase)
    per_input = illum.input_photons / cavity.T1
    absorbed = (np.abs(left.fwd) ** 2 + np.abs(right.bwd) ** 2
                - np.abs(left.bwd) ** 2 - np.abs(right.fwd) ** 2)
    # field at the layer: left-incident wave plus right-incident wave carried
    # through the carrier
    fluence = np.abs(left.fwd + coeffs.t_g * right.bwd) ** 2
    return DamageReport(np.maximum(absorbed, 0.0) * per_input, fluence * per_input)


def incident_pulses(n: int, cavity: CavityConfig, coeffs: SampleCoeffs):
    """Incident pairs ``M^k (1, 0)`` for ``k = 0..n-1`` as two arrays.

    Uses ``M^k = g_k M - det(M) g_(k-1) I`` (Cayley-Hamilton).
    """
    M = TransferMatrix.round_trip(cavity, coeffs)
    eig = eigenpair(M)
    k = np.arange(n)
    g = pulse_weight(k, eig)
    g_prev = np.concatenate([[0.0], g[:-1]]) if n else g
    a = g * M.a - M.det * g_prev
    b = g * M.c
    if n:
        a[0], b[0] = 1.0, 0.0
    return a, b


def _absorption_terms(n: int, cavity: CavityConfig, coeffs: SampleCoeffs):
    a, b = incident_pulses(n, cavity, coeffs)
    out_l = coeffs.r_sL * a + coeffs.t_s * b
    out_r = coeffs.t_s * a + coeffs.r_sR * b
    incident = np.abs(a) ** 2 + np.abs(b) ** 2
    absorbed = incident - np.abs(out_l) ** 2 - np.abs(out_r) ** 2
    return absorbed, incident


def pulsed_absorption(m_max: int | None, cavity: CavityConfig, coeffs: SampleCoeffs,
                      illum: IlluminationSpec = IlluminationSpec(), cumulative: bool = False):
    """Energy absorbed after ``m_max`` sample passes of one injected pulse.

    ``m_max=None`` sums the whole (truncated) ring-down train. With
    ``cumulative=True`` returns per-pass running totals as arrays
    ``(absorbed, fluence)`` instead of a report.
    """
    tail = 0.0
    if m_max is None:
        n = train_length(cavity, coeffs)
        tail = tail_bound(n, cavity, coeffs) * illum.input_photons
    else:
        if m_max < 1:
            raise ValueError("m_max must be >= 1")
        n = int(m_max)
    absorbed, incident = _absorption_terms(n, cavity, coeffs)
    if cumulative:
        # clip round-off below zero; passive samples never gain energy
        return (np.maximum(np.cumsum(absorbed), 0.0) * illum.input_photons,
                np.cumsum(incident) * illum.input_photons)
    return DamageReport(max(float(absorbed.sum()), 0.0) * illum.input_photons,
                        float(incident.sum()) * illum.input_photons, tail_bound=tail)


# --- weak-sample closed forms -------------------------------------------------

@dataclass(frozen=True)
class WSPrediction:
    """Weak-sample estimates. ``bf`` and ``znk_*`` are sample-minus-reference
    photon numbers, ``df`` is the full dark-field count."""

    regime: str
    mean_roundtrips: float
    ref: float
    bf: float
    df: float
    znk_plus: float
    znk_minus: float
    absorbed: float
    extra: dict = field(default_factory=dict)


def ws_absorbed_pulsed(m, cavity: CavityConfig, chi: Susceptibility, input_photons: float = 1000.0):
    """Absorbed photons after m passes, linear in chi_I (m may be ``inf``)."""
    r1, r2 = cavity.r1, cavity.r2
    R1, R2 = cavity.R1, cavity.R2
    lead = (1 + R2) / (1 - R1 * R2)
    if np.isinf(m):
        bracket = lead
    else:
        p = r1 * r2
        bracket = lead - p ** m / (2 * r1) * ((r1 + r2) / (1 - p) + (-1) ** m * (r1 - r2) / (1 + p))
    return 2 * input_photons * chi.imag * bracket


def ws_predictions(cavity: CavityConfig, chi: Susceptibility, carrier: CarrierSpec | None = None,
                   regime: str = "cw", m: int | None = None, input_photons: float = 1000.0,
                   efficiency: float = 1.0) -> WSPrediction:
    """Closed-form weak-sample signals and damage.

    regime: ``"cw"`` (on resonance, no carrier), ``"rd"`` (time-integrated
    ring-down), ``"mp"`` (m odd passes, actively outcoupled with
    ``efficiency``), or ``"pulse"`` (the single m-th ring-down pulse).
    """
    kdg = 0.0 if carrier is None else carrier.phase_thickness
    cR, cI, c2 = chi.real, chi.imag, abs(chi.chi) ** 2
    R1, R2, T2 = cavity.R1, cavity.R2, cavity.T2
    r1, r2 = cavity.r1, cavity.r2
    ell = float(np.sqrt(R1 * R2) / (1 - np.sqrt(R1 * R2)))
    even_factor = abs(r1 * np.exp(2j * kdg) + r2) ** 2 / 4

    if regime == "cw":
        L = 1 / (1 - np.sqrt(R1 * R2))
        ref = T2 * input_photons * L ** 2
        return WSPrediction("cw", ell, ref, -8 * L * cI * ref, 16 * L ** 2 * c2 * ref,
                            8 * L * cR * ref, -8 * L * cR * ref, 8 * cI * ref / T2)
    if regime == "rd":
        x = R1 * R2
        ref = T2 * input_photons / (1 - x)
        lin = T2 * input_photons * (1 + x) / (1 - x) ** 2
        odd2 = (1 + 6 * x + x * x) / (1 - x) ** 3
        even2 = 4 * (1 + x) / (1 - x) ** 3
        df = c2 * T2 * input_photons * (odd2 + even_factor * even2)
        return WSPrediction("rd", ell, ref, -2 * cI * lin, df, 2 * cR * lin, -2 * cR * lin,
                            ws_absorbed_pulsed(np.inf, cavity, chi, input_photons))
    if m is None or m < 1:
        raise ValueError(f"regime {regime!r} needs a pass number m >= 1")
    if regime == "mp":
        if m % 2 == 0:
            raise ValueError("multi-pass outcoupling needs odd m")
        if not np.isclose(R1, R2):
            raise ValueError("multi-pass estimates assume R1 == R2")
        R = R1
        ref = efficiency * input_photons * R ** (m - 1)
        return WSPrediction("mp", ell, ref, -2 * cI * m * ref, c2 * m * m * ref,
                            2 * cR * m * ref, -2 * cR * m * ref,
                            2 * input_photons * cI * (1 - R ** m) / (1 - R))
    if regime == "pulse":
        absorbed = ws_absorbed_pulsed(m, cavity, chi, input_photons)
        if m % 2:
            ref = T2 * input_photons * (R1 * R2) ** ((m - 1) // 2)
            return WSPrediction("pulse", ell, ref, -2 * m * cI * ref, c2 * m * m * ref,
                                2 * m * cR * ref, -2 * m * cR * ref, absorbed)
        prev = T2 * input_photons * (R1 * R2) ** ((m - 2) // 2)
        q = c2 * m * m * even_factor * prev
        return WSPrediction("pulse", ell, 0.0, q, q, q, q, absorbed)
    raise ValueError(f"unknown regime {regime!r}")


def ws_cw_output(cavity: CavityConfig, chi: Susceptibility, carrier: CarrierSpec | None, phase):
    """Stationary output amplitude to lowest order in chi."""
    kdg = 0.0 if carrier is None else carrier.phase_thickness
    j = 0 if carrier is None else carrier.half_wave_order
    x = chi.chi
    r1, r2 = cavity.r1, cavity.r2
    num = (-1) ** j * cavity.t1 * cavity.t2 * phase * np.exp(-1j * kdg + 1j * x)
    den = (1 - r1 * r2 * phase ** 2 * np.exp(-2j * kdg + 2j * x)
           - 1j * x * phase * np.exp(-1j * kdg) * (r1 * np.exp(1j * kdg) + r2 * np.exp(-1j * kdg)))
    return num / den


def ws_pulse_amplitudes(m, cavity: CavityConfig, chi: Susceptibility, carrier: CarrierSpec | None = None):
    """Output amplitude of the m-th pulse to lowest order in chi."""
    m = np.asarray(m)
    kdg = 0.0 if carrier is None else carrier.phase_thickness
    j = 0 if carrier is None else carrier.half_wave_order
    x = chi.chi
    r1, r2 = cavity.r1, cavity.r2
    pref = (-1) ** j * cavity.t1 * cavity.t2 * np.exp(-1j * kdg + 1j * x)
    q = r1 * r2 * np.exp(2j * x - 2j * kdg)
    odd = pref * q ** ((m - 1) // 2)
    ell = m // 2
    even = pref * q ** ell * 1j * ell * x * (r1 * np.exp(2j * kdg) + r2) / (r1 * r2)
    return np.where(m % 2 == 1, odd, even)
