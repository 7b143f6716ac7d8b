"""Exception hierarchy shared by every hyerslab module."""


class HyersLabError(Exception):
    """Base class for all library errors."""


class ContextMismatch(HyersLabError, ValueError):
    """Element does not belong to the algebra context it was used with."""


class IdentityViolation(HyersLabError, ValueError):
    pass


class DegreeOverflow(HyersLabError, OverflowError):
    pass


class ArityMismatch(HyersLabError, ValueError):
    pass


class Divergent(HyersLabError, ValueError):
    """The requested series (or Hyers sequence) is outside its convergent regime."""


class TailNotCertifiable(HyersLabError, ValueError):
    pass


class InvalidRegime(HyersLabError, ValueError):
    pass


class CapExceeded(HyersLabError, OverflowError):
    pass


class NotCertified(HyersLabError, ValueError):
    pass


class PreconditionViolated(HyersLabError, ValueError):
    pass


class ScalingHypothesisViolated(HyersLabError, ValueError):
    pass


class InapplicableHypothesis(HyersLabError, ValueError):
    pass


class SingularS(HyersLabError, ValueError):
    pass


class DenominatorDegenerate(HyersLabError, ValueError):
    pass


class EvaluationFailure(HyersLabError, RuntimeError):
    """A probe function raised while being evaluated."""


class ConfigError(HyersLabError, ValueError):
    pass
