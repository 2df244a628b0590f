"""Detected photon numbers for bright-field, dark-field and Zernike readout.

The Fourier-plane plate behind the output mirror acts on the undiffracted
background only. Per pixel, that background is the output of the same
cavity with an empty carrier plate, so a plate with factor ``c`` turns the
sample amplitude ``a_s`` into ``a_s - c * a_g``:

    BF   c = 0        (no plate)
    DF   c = 1        (block)
    Znk+ c = 1 - i    (background shifted by -pi/2)
    Znk- c = 1 + i    (background shifted by +pi/2)

The reference pixel (empty plate) is detected through the same optics; for
DF it is dark, for the other modes it gives ``|a_g|^2``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cavity import (
    CavityConfig,
    IlluminationSpec,
    TransferMatrix,
    cw_output,
    eigenpair,
    pulse_weight,
    tail_bound,
    train_length,
)
from .materials import SampleCoeffs


class DetectionMode(enum.Enum):
    BF = "bf"
    DF = "df"
    ZNK_PLUS = "znk+"
    ZNK_MINUS = "znk-"

    @property
    def plate_factor(self) -> complex:
        return _PLATE[self]

    @property
    def has_reference(self) -> bool:
        return self is not DetectionMode.DF

    @classmethod
    def parse(cls, value) -> "DetectionMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for mode in cls:
            if key in (mode.value, mode.name.lower()):
                return mode
        raise ValueError(f"unknown detection mode {value!r}; use one of bf, df, znk+, znk-")


_PLATE = {
    DetectionMode.BF: 0j,
    DetectionMode.DF: 1 + 0j,
    DetectionMode.ZNK_PLUS: 1 - 1j,
    DetectionMode.ZNK_MINUS: 1 + 1j,
}

ALL_MODES = tuple(DetectionMode)


@dataclass(frozen=True, eq=False)
class PulseTrain:
    """Per-pulse photon numbers on the sample (``n1``) and reference (``n2``) pixel."""

    mode: DetectionMode
    m: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    tail_bound: float = 0.0

    def accumulate(self, time_tagged: bool = False) -> "DetectionRecord":
        n1, n2 = float(self.n1.sum()), float(self.n2.sum())
        signed = None
        if time_tagged:
            # flip the sign of every other pulse before summing the difference
            sign = np.where(self.m % 2 == 1, 1.0, -1.0)
            signed = float(np.sum(sign * (self.n1 - self.n2)))
        return DetectionRecord(n1, n2, self.mode, "rd", signed, self.tail_bound)


@dataclass(frozen=True, eq=False)
class DetectionRecord:
    """Accumulated photon numbers of the sample and reference pixel.

    ``signed_signal`` overrides ``n1 - n2`` for post-processed (time-tagged)
    ring-down data.
    """

    n1: float
    n2: float
    mode: DetectionMode
    regime: str
    signed_signal: float | None = None
    tail_bound: float = 0.0

    @property
    def signal(self):
        return self.n1 - self.n2 if self.signed_signal is None else self.signed_signal

    @property
    def snr(self):
        total = np.asarray(self.n1 + self.n2, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(total > 0, np.abs(self.signal) / np.sqrt(total), 0.0)
        return out[()] if out.ndim == 0 else out

    def scaled(self, s) -> "DetectionRecord":
        signed = None if self.signed_signal is None else self.signed_signal * s
        return DetectionRecord(self.n1 * s, self.n2 * s, self.mode, self.regime, signed,
                               self.tail_bound * s)


def _amplitudes(m, cavity, coeffs):
    eig = eigenpair(TransferMatrix.round_trip(cavity, coeffs))
    eig_g = eigenpair(TransferMatrix.empty_plate(cavity, coeffs))
    return coeffs.t_s * pulse_weight(m, eig), coeffs.t_g * pulse_weight(m, eig_g)


def pulsed_signal(mode, m, cavity: CavityConfig, coeffs: SampleCoeffs,
                  illum: IlluminationSpec = IlluminationSpec(), outcoupling=None):
    """Photons of the m-th output pulse on the sample and reference pixel.

    ``outcoupling`` replaces the output-mirror transmission ``T2`` (active
    outcoupling in multi-pass imaging).
    """
    mode = DetectionMode.parse(mode)
    T = cavity.T2 if outcoupling is None else outcoupling
    sample, ref = _amplitudes(m, cavity, coeffs)
    n1 = illum.input_photons * T * np.abs(sample - mode.plate_factor * ref) ** 2
    if mode.has_reference:
        n2 = illum.input_photons * T * np.abs(ref) ** 2
    else:
        n2 = np.zeros_like(n1)
    return n1, n2


def pulse_train(mode, cavity: CavityConfig, coeffs: SampleCoeffs,
                illum: IlluminationSpec = IlluminationSpec(), m_max: int | None = None) -> PulseTrain:
    """The ring-down pulse train up to ``m_max`` (default: until negligible)."""
    mode = DetectionMode.parse(mode)
    tail = 0.0
    if m_max is None:
        m_max = train_length(cavity, coeffs)
        tail = tail_bound(m_max, cavity, coeffs) * illum.input_photons * float(np.max(cavity.T2))
    m = np.arange(1, m_max + 1)
    n1, n2 = pulsed_signal(mode, m, cavity, coeffs, illum)
    return PulseTrain(mode, m, n1, n2, tail)


def rd_accumulate(mode, cavity: CavityConfig, coeffs: SampleCoeffs,
                  illum: IlluminationSpec = IlluminationSpec(), time_tagged: bool = False) -> DetectionRecord:
    """Time-integrated ring-down signal.

    ``time_tagged`` flips the sign of even-numbered pulses in the difference
    signal, which removes the cancellation between transmitted and
    sample-reflected light.
    """
    return pulse_train(mode, cavity, coeffs, illum).accumulate(time_tagged)


def cw_signal(mode, cavity: CavityConfig, coeffs: SampleCoeffs, phase,
              illum: IlluminationSpec = IlluminationSpec(regime="cw")) -> DetectionRecord:
    """Stationary detection per window injecting ``illum.input_photons``."""
    mode = DetectionMode.parse(mode)
    a_s = cw_output(cavity, coeffs, phase)
    a_g = cw_output(cavity, coeffs.empty(), phase)
    per_input = illum.input_photons / cavity.T1
    n1 = per_input * np.abs(a_s - mode.plate_factor * a_g) ** 2
    n2 = per_input * np.abs(a_g) ** 2 if mode.has_reference else np.zeros_like(n1)
    return DetectionRecord(n1, n2, mode, "cw")


def mp_signal(mode, ell, cavity: CavityConfig, coeffs: SampleCoeffs,
              illum: IlluminationSpec = IlluminationSpec(), outcoupler_efficiency: float = 1.0) -> DetectionRecord:
    """Pulse actively outcoupled after ``m = 2*ell + 1`` sample passes.

    Light that was reflected an odd number of times at the sample travels
    backwards at that moment and is not outcoupled.
    """
    if not np.isclose(cavity.R1, cavity.R2):
        raise ValueError("multi-pass imaging assumes R1 == R2")
    ell = np.asarray(ell)
    if np.any(ell < 0):
        raise ValueError("ell must be >= 0")
    n1, n2 = pulsed_signal(mode, 2 * ell + 1, cavity, coeffs, illum, outcoupling=outcoupler_efficiency)
    return DetectionRecord(n1[()] if np.ndim(n1) == 0 else n1,
                           n2[()] if np.ndim(n2) == 0 else n2,
                           DetectionMode.parse(mode), "mp")
