"""Exception hierarchy.

Every error maps onto one of the CLI exit codes: configuration problems (2),
violated preconditions (3) and numerical failures (4).
"""


class PencilError(Exception):
    exit_code = 4


class ConfigError(PencilError):
    exit_code = 2


class PreconditionError(PencilError, ValueError):
    exit_code = 3


class NumericalError(PencilError, ArithmeticError):
    exit_code = 4


# spectral_core
class NonSquare(PreconditionError):
    pass


class NearDefective(NumericalError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class InvalidState(PreconditionError):
    pass


# signal_gen
class FamilySpectrumMismatch(PreconditionError):
    pass


# quantum_access
class InvalidProbability(PreconditionError):
    pass


class InvalidAccuracy(PreconditionError):
    pass


class NormalizedValueOutOfRange(PreconditionError):
    pass


# matrix_pencil
class SeriesTooShort(PreconditionError):
    pass


class AllSingular(NumericalError):
    pass


class SingularPencil(NumericalError):
    pass


class ZeroModulus(NumericalError):
    pass


# approx_poly
class DomainViolation(PreconditionError):
    pass


# bounds_lab
class CoincidentNodes(PreconditionError):
    pass


class PreconditionViolated(PreconditionError):
    pass


class MissingParameter(PreconditionError):
    pass


# applications
class TooLarge(PreconditionError):
    pass


class NoSteadyStateDetected(NumericalError):
    pass


class OnlySteadyState(NumericalError):
    pass
