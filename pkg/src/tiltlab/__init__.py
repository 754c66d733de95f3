"""tiltlab: exact homological computations for finite-dimensional algebras.

The package decides, in exact arithmetic, whether the object produced by
cone iteration from a simple-minded collection has a tilting-module
heart, and cross-checks the answer through a Koszul-dual route built
from minimal A-infinity models.
"""

__version__ = "0.1.0"
