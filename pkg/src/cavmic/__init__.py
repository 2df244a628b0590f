"""Shot-noise limited imaging of thin samples inside a self-imaging 8f cavity.

Modules
-------
materials   sample and carrier optics
cavity      round-trip matrices, pulse trains, stationary fields, damage
detection   bright-field, dark-field and Zernike readout
experiments constant-damage SNR, sweeps, wavelength calibration
cli         command-line front end
"""

__version__ = "0.1.0"

from .cavity import CavityConfig, DamageReport, IlluminationSpec, TransferMatrix  # noqa: E402
from .detection import ALL_MODES, DetectionMode, DetectionRecord  # noqa: E402
from .experiments import (  # noqa: E402
    DamageBudget,
    SnrPoint,
    SweepGrid,
    calibrate_wavelength,
    damage_functional,
    normalize_input,
    single_pass_reference,
    snr,
    sweep,
    table1,
)
from .materials import (  # noqa: E402
    BORON_NITRIDE,
    GRAPHENE,
    CarrierSpec,
    MaterialLayer,
    Sample,
    WavelengthSpec,
)
