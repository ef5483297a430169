"""Pseudo-spectral laboratory for u_t + H u_xx + u_xxx + u u_x = 0."""

__version__ = "0.1.0"
