"""Verification toolkit for lifted Boyer-Finley solutions of the hyperbolic
complex Monge-Ampere equation and the ultra-hyperbolic metrics they generate."""

from heavenly_lift.jets import Jet, Point4, seed_complex, seed_coordinates

__all__ = ["Jet", "Point4", "seed_complex", "seed_coordinates"]

__version__ = "0.1.0"
