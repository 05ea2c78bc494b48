"""Weakly-supervised aspect-based sentiment analysis with a seeded VAE topic model."""

__version__ = "0.1.0"
