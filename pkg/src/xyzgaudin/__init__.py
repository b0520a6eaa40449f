"""xyzgaudin: numerics for the fully anisotropic (XYZ) Gaudin magnet.

Subpackages: ``elliptic`` (theta-series special functions), ``spinops``
(integrals of motion, parity, exact diagonalization), ``bethe`` (root
solver and enumeration), ``acsm`` (central-spin continuation pipeline),
``verify`` (consistency suites), ``cli`` (command line).
"""

from . import acsm, backend, bethe, elliptic, spinops, verify  # noqa: F401
from .elliptic import EllipticContext, make_context  # noqa: F401

__version__ = "0.1.0"
