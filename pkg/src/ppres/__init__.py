"""Design and analysis toolkit for nanowire lumped-element resonators used in
pulsed and dispersive electron-spin detection."""
from . import circuit, fields, protocols, spectroscopy, tuning
from .circuit import CircuitParams, DeviceDesign
from .errors import PpresError
from .fields import CrossSection, SpinSpecies
from .spectroscopy import ComplexTrace, ResonanceFit

__version__ = "0.1.0"

__all__ = [
    "circuit", "fields", "protocols", "spectroscopy", "tuning",
    "CircuitParams", "DeviceDesign", "PpresError", "CrossSection", "SpinSpecies",
    "ComplexTrace", "ResonanceFit",
]
