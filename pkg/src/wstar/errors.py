"""Exception hierarchy for the workbench.

Every error raised on purpose by the package derives from :class:`WStarError`
and carries a short machine-readable ``code`` used by the command line front
end when it reports failures as JSON.
"""


class WStarError(Exception):
    """Base class for all package errors."""

    code = "WStarError"

    def to_json(self):
        return {"error": self.code, "message": str(self)}


class BadDimension(WStarError):
    code = "BadDimension"


class NotHermitian(WStarError):
    code = "NotHermitian"


class NotUnitTrace(WStarError):
    code = "NotUnitTrace"


class NotFaithful(WStarError):
    code = "NotFaithful"


class DimensionMismatch(WStarError):
    code = "DimensionMismatch"


class NonFiniteMultiplier(WStarError):
    code = "NonFiniteMultiplier"


class NonPositiveBandwidth(WStarError):
    code = "NonPositiveBandwidth"


class BadWeights(WStarError):
    code = "BadWeights"


class BadRange(WStarError):
    code = "BadRange"


class LengthMismatch(WStarError):
    code = "LengthMismatch"


class UnsupportedKernel(WStarError):
    code = "UnsupportedKernel"


class BadExponents(WStarError):
    code = "BadExponents"


class UnboundVariable(WStarError):
    code = "UnboundVariable"


class DomainViolation(WStarError):
    code = "DomainViolation"


class BadInstantiation(WStarError):
    code = "BadInstantiation"


class BadParameters(WStarError):
    code = "BadParameters"


class NonPositiveU(WStarError):
    code = "NonPositiveU"


class ParameterWindowViolation(WStarError):
    code = "ParameterWindowViolation"


class ParseError(WStarError):
    code = "ParseError"


class InvalidInput(WStarError):
    code = "InvalidInput"
