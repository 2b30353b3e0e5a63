"""nigelpark: deterministic 2D autonomous-parking stack and verification harness."""

__version__ = "0.1.0"
