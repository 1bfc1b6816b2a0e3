"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable code so the CLI can emit
structured JSON and a stable exit status.
"""


class TwistDensityError(Exception):
    code = "ERROR"


class ConfigError(TwistDensityError):
    """Bad user configuration (unparseable file, invalid parameter range)."""
    code = "CONFIG_ERROR"


class SingularCurveError(ConfigError):
    """Curve with vanishing discriminant."""
    code = "SINGULAR_CURVE"


class DomainError(TwistDensityError):
    """Argument outside an operation's mathematical domain."""
    code = "DOMAIN_ERROR"


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole."""
    code = "POLE_ERROR"


class ScaleError(TwistDensityError):
    """Computation requested beyond the supported desk scale."""
    code = "SCALE_ERROR"


class NumericError(TwistDensityError):
    """A numerical routine could not reach its target tolerance."""
    code = "NUMERIC_ERROR"

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DegenerateFamilyError(NumericError):
    """Family normalizer too small to divide by."""
    code = "DEGENERATE_FAMILY"


class TailBoundError(NumericError):
    """Series cutoff too small; carries the required cutoff."""
    code = "TAIL_BOUND"

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
