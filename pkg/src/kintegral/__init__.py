"""K-theoretic integral structures on orbifold quantum cohomology."""

from .algebra import ensure_default_precision

__version__ = "0.1.0"

ensure_default_precision()
