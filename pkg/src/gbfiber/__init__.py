"""Gupta-Bleuler quantized light in step-index fibers under weak gravity."""

__version__ = "0.1.0"
