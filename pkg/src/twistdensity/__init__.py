"""One-level density of low-lying zeros for quadratic twist families.

Library layout:
  ntkit    arithmetic primitives (sieves, Kronecker symbol, Gauss sums)
  curve    elliptic-curve local data and twist root numbers
  testfn   test functions and family weights with their transforms
  charsum  weighted character sums and the Poisson/Gauss-sum checks
  density  explicit-formula evaluation (single twist and family averages)
  predict  closed-form main terms and the ratios-conjecture route
  zeros    completed L-values and critical-line zeros (oracle)
  cli      configuration, orchestration, CSV/JSON emission
"""

from .curve import CurveSpec, LocalData, validate_curve
from .density import DensityReport, FamilyParams, dx_single, family_density
from .errors import (ConfigError, DomainError, NumericError, PoleError,
                     ScaleError, SingularCurveError, TwistDensityError)
from .ntkit import SieveTable, build_sieve, gauss_data, kronecker
from .testfn import TestFunction, WeightFunction, build_testfn, build_weight

__version__ = "0.1.0"

__all__ = [
    "CurveSpec", "LocalData", "validate_curve",
    "DensityReport", "FamilyParams", "dx_single", "family_density",
    "SieveTable", "build_sieve", "gauss_data", "kronecker",
    "TestFunction", "WeightFunction", "build_testfn", "build_weight",
    "ConfigError", "DomainError", "NumericError", "PoleError", "ScaleError",
    "SingularCurveError", "TwistDensityError",
    "__version__",
]
