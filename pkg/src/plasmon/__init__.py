"""Software workbench for plasma-wave propagation on a qubit chain."""

__version__ = "0.1.0"
