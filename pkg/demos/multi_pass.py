"""
Multi-pass sweet spot
=====================

Light makes m passes through the sample before it is switched out. The SNR
grows like sqrt(m) while mirror loss is negligible and falls once losses
dominate, so there is a best number of passes.
"""

import numpy as np

from cavmic import BORON_NITRIDE, GRAPHENE, Sample
from cavmic.experiments import default_wavelength, mp_sweep, ws_mp_snr_ratio

wl = default_wavelength()
m = np.arange(1, 202, 2)
for mat, mode in ((GRAPHENE, "bf"), (BORON_NITRIDE, "znk+"), (BORON_NITRIDE.scaled(20), "znk+")):
    pts = mp_sweep(Sample(mat, wl), mode, m)
    S = np.array([p.snr for p in pts])
    i = int(np.argmax(S))
    print(f"{mat.name:6} x{mat.layers:<3} {mode:5} best m {m[i]:4d}  SNR {S[i]:.3f}  gain {S[i] / S[0]:.1f}x")

print("weak-sample gain at R = 0.98:", np.round(ws_mp_snr_ratio([1, 11, 51, 101], 0.98), 2))
