"""Exception hierarchy.

Every error raised by the package derives from :class:`BNError`. Errors that
originate in a text document carry ``line`` and ``column`` (1-based) of the
first offending token.
"""


class BNError(Exception):
    def __init__(self, message, *, line=None, column=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self):
        if self.line is not None:
            return f"{self.line}:{self.column}: {self.message}"
        return self.message


class InvariantViolation(BNError):
    """An internal consistency check failed (a bug, not bad input)."""


# -- model ------------------------------------------------------------------

class ModelError(BNError):
    pass


class CycleDetected(ModelError):
    pass


class BadCptShape(ModelError):
    pass


class RowNotNormalized(ModelError):
    pass


class DuplicateName(ModelError):
    pass


class InvalidVariable(ModelError):
    pass


class UnknownVariable(ModelError, KeyError):
    def __str__(self):
        return BNError.__str__(self)


# -- potential ----------------------------------------------------------------

class PotentialError(BNError):
    pass


class StateSetMismatch(PotentialError):
    pass


class KeepNotSubset(PotentialError):
    pass


class DivisionByZero(PotentialError, ZeroDivisionError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class VariableNotInDomain(PotentialError):
    pass


# -- compile ------------------------------------------------------------------

class NoHostClique(InvariantViolation):
    pass


class RunningIntersectionViolated(InvariantViolation):
    pass


# -- propagate / conflict -----------------------------------------------------

class EvidenceError(BNError):
    pass


class ZeroPriorFinding(EvidenceError):
    pass


class AllZeroMask(EvidenceError):
    pass


class NotCoveredByAnyClique(EvidenceError):
    pass


class NotCalibrated(EvidenceError):
    pass


class InconsistentEvidence(EvidenceError):
    """Posteriors were requested but the entered findings have probability 0."""


class ZeroPrior(EvidenceError):
    pass


class TooLarge(BNError):
    pass


# -- netio --------------------------------------------------------------------

class FormatError(BNError):
    pass


class NetSyntaxError(FormatError):
    pass


class UnknownState(FormatError):
    pass


class BadRowSum(FormatError):
    pass


class DuplicateDeclaration(FormatError):
    pass


class BadMaskLength(FormatError):
    pass
