"""Security metrics for polarization-encoded four-wave-mixing signal fields.

Modules
-------
numerics  special functions and constants
signal    signal-field grids, contrast, wave-plate detection, dataset CSV
qstate    Bloch vectors, entropies, ensemble Holevo bounds
keyrate   pulses per bit, bit error, secret bits per pulse
response  three-resonance line-shape model and interference maps
cli       batch commands (``python -m fwmsec``)
"""

from .errors import (
    ConfigError,
    DarkPointError,
    DomainError,
    FwmsecError,
    GridShapeError,
    ParseError,
    ValidationError,
)
from .keyrate import TogglingScheme, keyrate_spectrum
from .qstate import holevo_bound, state_from_fields, windowed_holevo_report
from .response import AmplitudeSet, ModelParams, interference_panels, synthesize_field
from .signal import DetectionSettings, GridAxes, SignalGrid, load_grid, save_grid

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DarkPointError",
    "DomainError",
    "FwmsecError",
    "GridShapeError",
    "ParseError",
    "ValidationError",
    "TogglingScheme",
    "keyrate_spectrum",
    "holevo_bound",
    "state_from_fields",
    "windowed_holevo_report",
    "AmplitudeSet",
    "ModelParams",
    "interference_panels",
    "synthesize_field",
    "DetectionSettings",
    "GridAxes",
    "SignalGrid",
    "load_grid",
    "save_grid",
]
