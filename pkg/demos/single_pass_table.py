"""
Single-pass reference SNRs
==========================

One pass of 1000 photons through graphene, one layer of boron nitride and
twenty layers of boron nitride, read out in all four detection modes.
These are the numbers every cavity scheme is compared against.
"""

from cavmic import ALL_MODES, table1
from cavmic.experiments import DEFAULT_WAVELENGTH_NM

print(f"wavelength {DEFAULT_WAVELENGTH_NM:.3f} nm")
snrs = table1()
print("sample   " + "".join(f"{m.value:>8}" for m in ALL_MODES))
for name in ("graphene", "bn", "bn20"):
    print(f"{name:9}" + "".join(f"{snrs[name, m.value]:8.3f}" for m in ALL_MODES))
