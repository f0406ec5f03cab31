"""Algorithmic rate-distortion toolkit.

Estimates individual rate-distortion curves with a real compressor as
the description-length oracle, builds Hamming ball covers, plays the
online set-cover marking game, computes the classical Shannon baseline,
and denoises bitmaps by compression.
"""

__version__ = "0.1.0"
