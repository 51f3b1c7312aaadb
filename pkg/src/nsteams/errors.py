"""Exception types shared across the package."""

from __future__ import annotations


class NsteamsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NsteamsError):
    """A model violates a structural invariant.

    ``diagnostics`` holds one human-readable string per violated invariant,
    each naming the offending row.
    """

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class NormalizationError(ValidationError):
    """Prior weights do not sum to exactly 1."""


class MissingEntry(NsteamsError):
    """A table is not total on its declared domain."""


class GroundMismatch(NsteamsError):
    """Two partition fields live on different ground sets."""


class NotAFactor(NsteamsError):
    """Target ground does not factor as source ground times extra coordinates."""


class BadPrefix(NsteamsError):
    """An ordering prefix repeats an index or falls outside 1..N."""


class NotSolvable(NsteamsError):
    """Closed-loop equations have no unique solution for some (policy, omega)."""

    def __init__(self, policy, omega, count):
        self.policy = policy
        self.omega = omega
        self.count = count
        kind = "no solution" if count == 0 else f"{count} solutions"
        super().__init__(f"closed loop has {kind} at omega={omega}")


class MissingOrdering(NsteamsError):
    """An operation requiring an ordering function received none."""


class NotCausal(NsteamsError):
    """The model (or supplied ordering) does not support a causal construction."""


class NotCI(NsteamsError):
    """The model does not possess causal implementability."""


class NotPartiallyNested(NsteamsError):
    """The information structure is not partially nested."""


class NotInvertible(NsteamsError):
    """A measurement decomposition's h component is not invertible."""

    def __init__(self, dm, u_down):
        self.dm = dm
        self.u_down = u_down
        super().__init__(f"h for DM {dm} is not invertible at u_down={u_down}")


class PolicyDependenceDetected(NsteamsError):
    """Imaginary-model kernels differed across policies (checker bug under C)."""


class BudgetExceeded(NsteamsError):
    """An exhaustive sweep would exceed the configured evaluation budget."""

    def __init__(self, size, budget):
        self.size = size
        self.budget = budget
        super().__init__(f"policy space of size {size} exceeds budget {budget}")


class ModelMismatch(NsteamsError):
    """Two models do not share the same policy-space shape."""


class DeadlockEncountered(NsteamsError):
    """A simulated path hit a deadlocked or ambiguous stage."""

    def __init__(self, omega, stage):
        self.omega = omega
        self.stage = stage
        super().__init__(f"path deadlocked at stage {stage} for omega={omega}")


class EmptySample(NsteamsError):
    """Monte-Carlo estimation requires at least one sample."""


class ParseError(NsteamsError):
    """A document failed to parse; carries the defect location."""

    def __init__(self, message, line, column=1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, col {column}: {message}")


class DuplicateRow(ParseError):
    """A table row appeared twice in a document."""


class UnknownSymbol(ParseError):
    """A row referenced a symbol not declared in any alphabet."""


class ZeroDenominator(ParseError):
    """A rational literal had denominator zero."""
