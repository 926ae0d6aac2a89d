"""Broadband impedance-transformed Josephson parametric amplifier toolkit.

Modules
-------
taper
    Klopfenstein impedance profile and coplanar-waveguide widths.
network
    ABCD cascades, S-parameters and Touchstone files.
paramp
    Flux-pumped SQUID resonator: tuning, rotating-wave and embedded gain.
noise
    Noise temperature, SNR improvement and power conversions.
calibrate
    Tuning-curve, reflection, Stark-dephasing and compression fits.
cli
    Command-line workflows driven by one JSON config.
"""

from . import calibrate, network, noise, paramp, taper
from .errors import ImpaError, IoError
from .network import FrequencyGrid, ScatteringData, TwoPortABCD
from .paramp import GainProfile, PumpedResonator
from .taper import TaperDesignSpec, TaperProfile

__version__ = "0.1.0"

__all__ = [
    "calibrate", "network", "noise", "paramp", "taper",
    "ImpaError", "IoError",
    "FrequencyGrid", "ScatteringData", "TwoPortABCD",
    "GainProfile", "PumpedResonator",
    "TaperDesignSpec", "TaperProfile",
]
