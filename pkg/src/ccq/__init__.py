"""Restricted (circuit-limited) versus unrestricted quantum entropies."""
from .config import TOL, Tolerances
from .kernels import backend, use_backend

__version__ = "0.1.0"
__all__ = ["TOL", "Tolerances", "backend", "use_backend", "__version__"]
