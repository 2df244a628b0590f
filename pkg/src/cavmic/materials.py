"""Thin-film optics of the sample pixel.

Complex susceptibilities and transmission/reflection amplitudes of a thin
sample layer sitting on a (non-reflective) carrier plate, at normal
incidence and a single wavelength.

Phase conventions: fields carry ``exp(-i omega t)``, so absorbing media have
``Im(n) > 0``. The reference plane of the sample pixel is the interface
between the sample layer (left) and the carrier (right); vacuum propagation
over the physical thickness is removed from all amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

ANGSTROM = 1e-10

# Non-reflective carrier check, relative to j*pi (absolute when j = 0).
HALF_WAVE_RTOL = 1e-9


@dataclass(frozen=True)
class WavelengthSpec:
    """Vacuum wavelength in meters."""

    wavelength: float

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")

    @property
    def k(self) -> float:
        return 2 * np.pi / self.wavelength

    @classmethod
    def from_nm(cls, nm: float) -> "WavelengthSpec":
        return cls(nm * 1e-9)


@dataclass(frozen=True)
class MaterialLayer:
    """Homogeneous film of ``layers`` stacked monolayers of thickness ``d``.

    Multi-layer films are treated as one slab of thickness ``layers * d``.
    """

    n: complex
    d: float
    layers: int = 1
    name: str = ""

    def __post_init__(self):
        if complex(self.n).imag < 0:
            raise ValueError("Im(n) must be >= 0 for a passive medium")
        if not self.d > 0:
            raise ValueError("monolayer thickness must be positive")
        if int(self.layers) != self.layers or self.layers < 1:
            raise ValueError("layers must be a positive integer")

    @property
    def thickness(self) -> float:
        return self.layers * self.d

    def scaled(self, layers: int) -> "MaterialLayer":
        return MaterialLayer(self.n, self.d, layers, self.name)


GRAPHENE = MaterialLayer(2.71 + 1.41j, 3.35 * ANGSTROM, 1, "graphene")
BORON_NITRIDE = MaterialLayer(1.8 + 0j, 3.33 * ANGSTROM, 1, "bn")
VACUUM = MaterialLayer(1.0 + 0j, 1.0 * ANGSTROM, 1, "vacuum")

PRESETS = {
    "graphene": GRAPHENE,
    "bn": BORON_NITRIDE,
    "bn20": BORON_NITRIDE.scaled(20),
    "vacuum": VACUUM,
}


def preset(name: str) -> MaterialLayer:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class CarrierSpec:
    """Transparent carrier plate of real index ``n_g`` and thickness ``d_g``.

    ``half_wave_order`` is the integer j with ``n_g k d_g = j pi``; j = 0 with
    ``d_g = 0`` means no carrier at all.
    """

    n_g: float = 1.5
    d_g: float = 0.0
    half_wave_order: int = 0

    def __post_init__(self):
        if self.n_g < 1:
            raise ValueError("carrier index must be >= 1")
        if self.d_g < 0:
            raise ValueError("carrier thickness must be >= 0")
        if self.half_wave_order < 0:
            raise ValueError("half_wave_order must be >= 0")

    @classmethod
    def none(cls) -> "CarrierSpec":
        return cls(1.5, 0.0, 0)

    @classmethod
    def half_wave(cls, wl: WavelengthSpec, n_g: float = 1.5, order: int = 1) -> "CarrierSpec":
        return cls(n_g, order * np.pi / (n_g * wl.k), order)

    @property
    def phase_thickness(self) -> float:
        """k d_g for a non-reflective plate, independent of wavelength."""
        return self.half_wave_order * np.pi / self.n_g

    def is_non_reflective(self, wl: WavelengthSpec) -> bool:
        target = self.half_wave_order * np.pi
        actual = self.n_g * wl.k * self.d_g
        return abs(actual - target) <= HALF_WAVE_RTOL * max(target, 1.0)


@dataclass(frozen=True)
class Susceptibility:
    chi: complex

    @property
    def real(self) -> float:
        return self.chi.real

    @property
    def imag(self) -> float:
        return self.chi.imag

    def __abs__(self):
        return abs(self.chi)


@dataclass(frozen=True)
class SampleCoeffs:
    """Per-pixel amplitudes of the sample (``t_s``, ``r_sL``, ``r_sR``) and of
    the bare carrier (``t_g``, ``r_g``)."""

    t_s: complex
    r_sL: complex
    r_sR: complex
    t_g: complex = 1.0 + 0j
    r_g: complex = 0j

    def empty(self) -> "SampleCoeffs":
        """Coefficients of an empty pixel on the same carrier."""
        return SampleCoeffs(self.t_g, self.r_g, self.r_g, self.t_g, self.r_g)

    @property
    def single_pass_absorption(self) -> float:
        return 1.0 - abs(self.t_s) ** 2 - abs(self.r_sL) ** 2


def susceptibility(material: MaterialLayer, wl: WavelengthSpec) -> Susceptibility:
    n = complex(material.n)
    return Susceptibility((n * n - 1) / 2 * wl.k * material.thickness)


def carrier_coefficients(carrier: CarrierSpec, wl: WavelengthSpec) -> tuple[complex, complex]:
    """Two-interface slab amplitudes ``(t_g, r_g)`` of the bare carrier."""
    if carrier.d_g == 0:
        return 1.0 + 0j, 0j
    if carrier.is_non_reflective(wl):
        j = carrier.half_wave_order
        return (-1) ** j * np.exp(-1j * wl.k * carrier.d_g), 0j
    n, k, d = carrier.n_g, wl.k, carrier.d_g
    e2 = np.exp(2j * n * k * d)
    den = (n + 1) ** 2 - (n - 1) ** 2 * e2
    t = 4 * n * np.exp(1j * (n - 1) * k * d) / den
    r = (n * n - 1) * (e2 - 1) / den
    return complex(t), complex(r)


def _require_non_reflective(carrier: CarrierSpec, wl: WavelengthSpec) -> None:
    if carrier.d_g == 0 and carrier.half_wave_order == 0:
        return
    if not carrier.is_non_reflective(wl):
        raise ValueError(
            "carrier is reflective at this wavelength "
            f"(n_g k d_g = {carrier.n_g * wl.k * carrier.d_g:.12g}, "
            f"expected {carrier.half_wave_order} pi); only non-reflective carriers are supported"
        )


def sample_coefficients(material: MaterialLayer, carrier: CarrierSpec, wl: WavelengthSpec) -> SampleCoeffs:
    """Exact amplitudes of a sample layer on a non-reflective carrier."""
    _require_non_reflective(carrier, wl)
    n = complex(material.n)
    k, d, dg = wl.k, material.thickness, carrier.d_g
    j = carrier.half_wave_order
    e2 = np.exp(2j * n * k * d)
    den = (n + 1) ** 2 - (n - 1) ** 2 * e2
    t_s = 4 * (-1) ** j * n * np.exp(1j * (n - 1) * k * d - 1j * k * dg) / den
    r_sL = (n * n - 1) * np.exp(-2j * k * d) * (e2 - 1) / den
    r_sR = np.exp(2j * k * (d - dg)) * r_sL
    t_g, r_g = carrier_coefficients(carrier, wl)
    return SampleCoeffs(complex(t_s), complex(r_sL), complex(r_sR), t_g, r_g)


def ws_sample_coefficients(chi: Susceptibility, carrier: CarrierSpec, wl: WavelengthSpec) -> SampleCoeffs:
    """Amplitudes linearised in the susceptibility (weak sample)."""
    x = complex(chi.chi)
    kdg = wl.k * carrier.d_g
    j = carrier.half_wave_order
    t_s = np.exp(1j * j * np.pi - 1j * kdg + 1j * x)
    t_g, r_g = carrier_coefficients(carrier, wl)
    return SampleCoeffs(complex(t_s), 1j * x, complex(1j * np.exp(-2j * kdg) * x), t_g, r_g)


@dataclass(frozen=True)
class Sample:
    """A material on a carrier, probed at one wavelength."""

    material: MaterialLayer
    wavelength: WavelengthSpec
    carrier: CarrierSpec = field(default_factory=CarrierSpec.none)

    def __post_init__(self):
        _require_non_reflective(self.carrier, self.wavelength)

    @cached_property
    def coeffs(self) -> SampleCoeffs:
        return sample_coefficients(self.material, self.carrier, self.wavelength)

    @cached_property
    def chi(self) -> Susceptibility:
        return susceptibility(self.material, self.wavelength)

    @property
    def k(self) -> float:
        return self.wavelength.k

    @property
    def is_lossless(self) -> bool:
        return self.chi.imag < 1e-9
