"""Kyber and McEliece reference implementations with an instrumented cost model."""

from .counters import OpCounters

__version__ = "0.1.0"
__all__ = ["OpCounters", "__version__"]
