"""Linear (RLT) solution of moment-robust chance-constrained real-time dispatch."""

__version__ = "0.1.0"
