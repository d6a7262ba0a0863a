"""Exception hierarchy. Every error raised by the library derives from StatcatError."""


class StatcatError(Exception):
    pass


class SpaceMismatch(StatcatError):
    pass


class DimensionMismatch(StatcatError):
    pass


class AbsoluteContinuityViolated(StatcatError):
    def __init__(self, message, atom=None):
        super().__init__(message)
        self.atom = atom


class NonMeasurableMap(StatcatError):
    def __init__(self, message, atom=None):
        super().__init__(message)
        self.atom = atom


class NonMeasurableEvent(StatcatError):
    pass


class NotACoarsening(StatcatError):
    pass


class FamilyMismatch(StatcatError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SearchBoundExceeded(StatcatError):
    pass


class UnsupportedCategory(StatcatError):
    pass


class ParseError(StatcatError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{position}: {message}"
        super().__init__(message)
        self.position = position


class InvariantError(StatcatError):
    pass
