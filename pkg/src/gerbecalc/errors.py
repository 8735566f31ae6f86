"""Exception hierarchy for gerbecalc."""


class GerbeError(Exception):
    """Base class for all library errors."""


class SpecMismatch(GerbeError):
    pass


class MembershipError(GerbeError):
    """A matrix failed the group or algebra membership test."""


class BranchCutError(GerbeError):
    """An eigenvalue sits too close to the principal branch cut of log."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class ArityError(GerbeError):
    pass


class NonManifold(GerbeError):
    pass


class NonOrientable(GerbeError):
    pass


class NotClosed(GerbeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotCone(GerbeError):
    pass


class SupportMismatch(GerbeError):
    pass


class DegreeMismatch(GerbeError):
    pass


class QuotientNotCocycle(GerbeError):
    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class LiftNotInH(GerbeError):
    pass


class NotSimplicial(GerbeError):
    pass


class NotGluable(GerbeError):
    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class NotConstant(GerbeError):
    def __init__(self, message, spread=None):
        super().__init__(message)
        self.spread = spread


class IncompatibleCurving(GerbeError):
    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class ParseError(GerbeError):
    def __init__(self, message, location=None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
