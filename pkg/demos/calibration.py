"""
Wavelength calibration
======================

The working wavelength is chosen so that one pass of 1000 photons deposits
26 absorbed photons in graphene. The weak-sample estimate 2 chi_I Q and the
full thin-film absorption give slightly different roots.
"""

from cavmic import GRAPHENE, CarrierSpec, calibrate_wavelength
from cavmic.materials import sample_coefficients

for method in ("weak-sample", "exact"):
    wl = calibrate_wavelength(GRAPHENE, 26.0, method=method)
    absorbed = 1000 * sample_coefficients(GRAPHENE, CarrierSpec.none(), wl).single_pass_absorption
    print(f"{method:12} {wl.wavelength * 1e9:9.3f} nm   exact absorption {absorbed:.4f}")
