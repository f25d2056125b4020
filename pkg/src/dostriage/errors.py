"""Exception types raised across the package."""


class DosTriageError(Exception):
    """Base class for all package errors."""


class InputError(DosTriageError):
    """Problems with user-supplied files or arguments (CLI exit code 2)."""


class MissingColumn(InputError):
    def __init__(self, name):
        super().__init__(f"missing required column: {name!r}")
        self.name = name


class EmptyFile(InputError):
    pass


class UnknownLabel(InputError):
    def __init__(self, value, schema):
        super().__init__(f"label {value!r} is not in the {schema} label table")
        self.value = value
        self.schema = schema


class MixedDomain(InputError):
    pass


class InvalidSpec(InputError, ValueError):
    pass


class TooFewRows(DosTriageError, ValueError):
    pass


class DimensionMismatch(DosTriageError, ValueError):
    pass


class SizeMismatch(DosTriageError, ValueError):
    pass


class LengthMismatch(DosTriageError, ValueError):
    pass


class EmptyInput(DosTriageError, ValueError):
    pass


class EmptyTrace(DosTriageError, ValueError):
    pass


class KTooLarge(DosTriageError, ValueError):
    pass


class NegativeDistance(DosTriageError, ValueError):
    pass


class NonFiniteCovariance(DosTriageError, ArithmeticError):
    pass


class NonFiniteActivation(DosTriageError, ArithmeticError):
    pass


class MissingClass(DosTriageError, ValueError):
    pass


class InsufficientAcceptedReplicates(DosTriageError):
    def __init__(self, accepted, required, attempts):
        super().__init__(
            f"only {accepted} of {required} replicates accepted after {attempts} attempts"
        )
        self.accepted = accepted
        self.required = required
        self.attempts = attempts
