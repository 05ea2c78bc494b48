"""Token-embedding extraction from a frozen pretrained transformer."""

__version__ = "0.1.0"
