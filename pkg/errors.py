"""
Error Types
Exception hierarchy shared by the arithmetic core, the pipelines and the CLI
"""


class TwistvalsError(Exception):
    """Base class for all errors raised by this project"""


class UnsupportedField(TwistvalsError):
    """Field is not in the supported allowlist or has narrow class number > 1"""


class FactorTooLarge(TwistvalsError):
    """Norm is outside the factorable range"""


class EvenPrime(TwistvalsError):
    """Residue-symbol test requested at a prime above 2"""


class BoxTooLarge(TwistvalsError):
    """Brute-force enumeration box exceeds the configured limit"""


class BasisError(TwistvalsError):
    """A module basis could not be brought into the required shape"""


class NotFullRank(TwistvalsError):
    """Generators do not span a full-rank lattice"""


class UnsupportedUnitStructure(TwistvalsError):
    """Totally positive units of Z_F are not all squares"""


class NotASquare(TwistvalsError):
    """An integer expected to be a perfect square is not one"""


class IntegralityError(TwistvalsError):
    """A quadratic form or order fails an integrality check"""


class DivisionByZero(TwistvalsError):
    """Denominator coefficient is zero"""


class EmptyDenominator(TwistvalsError):
    """Congruence ratio has no records on the denominator side"""


class IrrationalRatio(TwistvalsError):
    """Exact ratio requested where the value is irrational"""


class IrrationalCoefficient(TwistvalsError):
    """Weighted theta coefficient has a nonzero sqrt(d) part"""


class PackageError(TwistvalsError):
    """Form package could not be parsed"""


class ValidationError(TwistvalsError):
    """Input failed validation"""


class CheckpointError(TwistvalsError):
    """Checkpoint could not be used"""


class HashMismatch(CheckpointError):
    """Checkpoint was written for different inputs"""


class CheckpointCorrupt(CheckpointError):
    """Checkpoint and all of its backups are unreadable"""
