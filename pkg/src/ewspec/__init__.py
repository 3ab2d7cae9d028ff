"""Time-dependent physical spectra of standard and f-deformed Jaynes-Cummings and Rabi models."""
__version__ = "0.1.0"
