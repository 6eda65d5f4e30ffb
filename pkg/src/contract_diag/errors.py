"""Exception hierarchy shared by every module of the package."""


class ContractDiagError(Exception):
    """Base class for all errors raised by contract_diag."""


class TermSyntaxError(ContractDiagError, ValueError):
    """A term failed to parse. ``pos`` is the 0-based offset in ``text``."""

    def __init__(self, message, text="", pos=0):
        self.text = text
        self.pos = pos
        where = f" at position {pos}" if text else ""
        super().__init__(f"{message}{where}: {text!r}" if text else message)


class MissingVariableError(ContractDiagError, KeyError):
    """A valuation does not assign a variable the caller needs."""

    def __init__(self, name):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"no value for variable {self.name!r}"


class CapacityError(ContractDiagError):
    """A query exceeds a documented size bound."""


class EliminationError(ContractDiagError):
    """Variables could not be eliminated from a term with the given context."""


class ContractError(ContractDiagError, ValueError):
    """An IO contract violates its well-formedness rules."""


class CompositionError(ContractDiagError):
    """Composition of two contracts failed."""

    def __init__(self, message, stage=None):
        self.stage = stage
        prefix = f"stage {stage}: " if stage is not None else ""
        super().__init__(prefix + message)


class DiagnosisError(ContractDiagError):
    """The inputs of a diagnosis do not meet its preconditions."""


class NoViolationError(DiagnosisError):
    """The guarantee handed to diagnose is satisfied by the log."""


class NotSystemFailureError(DiagnosisError):
    """System-level assumptions are violated, so no component can be blamed."""


class SpecFormatError(ContractDiagError, ValueError):
    """A system spec or log file is malformed."""


class NoWitnessError(ContractDiagError):
    """Fault injection could not produce an observable, independent fault."""
