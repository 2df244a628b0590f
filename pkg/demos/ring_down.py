"""
Ring-down detection
===================

A single pulse enters the cavity and the leaking train is detected either
integrated or pulse by pulse. Time tagging lets each pulse be compared with
its own empty-cavity reference.
"""

import numpy as np

from cavmic import BORON_NITRIDE, GRAPHENE, Sample
from cavmic.experiments import default_wavelength, rd_sweep

wl = default_wavelength()
t2 = np.array([0.005, 0.02, 0.1, 0.5])
for mat in (GRAPHENE, BORON_NITRIDE):
    sample = Sample(mat, wl)
    for mode in ("bf", "znk+"):
        plain = rd_sweep(sample, mode, t2)
        tagged = rd_sweep(sample, mode, t2, time_tagged=True)
        row = "  ".join(f"{a.snr:6.3f}/{b.snr:6.3f}" for a, b in zip(plain, tagged))
        print(f"{mat.name:9} {mode:5} {row}")
print("columns: T2 =", ", ".join(map(str, t2)), "(integrated / time-tagged)")
