"""Random graphs with prescribed prime nodes in their modular decomposition."""

__version__ = "0.1.0"
