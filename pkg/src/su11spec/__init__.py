"""Spectral engineering of high-gain parametric down-conversion in a two-crystal
SU(1,1) interferometer with a dispersive gap."""

__version__ = "0.1.0"
