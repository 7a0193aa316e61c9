"""Extending partial automorphisms of finite structures, exactly.

Three engines share one exact scalar type:

* :mod:`eppa.metric` extends partial isometries of a finite metric space to
  isometries of a finite extension built from a finite quotient of a free
  group (:mod:`eppa.freegroup`).
* :mod:`eppa.malg` refines finite measure algebras so that every partial
  automorphism extends.
* :mod:`eppa.hilbert` extends partial linear isometries of exact
  inner-product spaces by reflections.
"""

from .errors import EppaError
from .scalar import Scalar, compare, format_scalar, parse_scalar

__all__ = ["EppaError", "Scalar", "compare", "format_scalar", "parse_scalar"]
__version__ = "0.1.0"
