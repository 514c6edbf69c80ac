"""Seiberg-Witten series gluing along 3-tori and numerical vortex theory on the cylinder."""

__version__ = "0.1.0"
