"""Exception hierarchy for gaugewalk."""


class GaugewalkError(Exception):
    """Base class for all gaugewalk errors."""


class ValidationError(GaugewalkError):
    """Invalid argument or configuration value."""


class ContractError(GaugewalkError):
    """Operation called outside its contract (step/parity/schedule mismatch)."""


class DomainError(GaugewalkError):
    """Stencil or window applied to a field that lacks the required slices."""


class SamplingError(GaugewalkError):
    """A field function failed to evaluate, or produced a non-finite value."""


class StencilConsistencyError(GaugewalkError):
    """An internal identity that must hold exactly was violated.

    Raised e.g. when a current sandwich that is real by construction carries
    an imaginary residue above tolerance; this signals a stencil bug, not a
    user error.
    """


class SolverInstabilityError(GaugewalkError):
    """The reference spinor solver lost normalization beyond its abort bound."""


class ParseError(GaugewalkError):
    """Syntax error in a field expression, annotated with an offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.position = position


class EvalError(GaugewalkError):
    """Runtime error while evaluating a field expression."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (offset {position})"
        super().__init__(message)
        self.position = position
