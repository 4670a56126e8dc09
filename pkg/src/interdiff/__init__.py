"""Interdependent belief diffusion simulator."""
__version__ = "0.1.0"
