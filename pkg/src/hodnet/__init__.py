"""Higher-order digital nets: interleaved construction, quality certification
and Korobov-space worst-case errors."""

__version__ = "0.1.0"
