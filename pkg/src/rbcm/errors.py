"""Exception types shared across the package."""


class MachineError(Exception):
    """Base class for machine-related failures."""


class NondeterministicInput(MachineError):
    """A deterministic-only operation was handed a nondeterministic machine."""


class PreconditionViolated(MachineError):
    """An operation's structural precondition does not hold for its input."""


class NotPrefixFree(PreconditionViolated):
    """A prefix-free language was required but the input language is not."""


class InfiniteBudget(PreconditionViolated):
    """Decision procedures require a finite reversal budget."""


class AlphabetMismatch(PreconditionViolated):
    """Two operands were expected to share an alphabet but do not."""


class UnknownEntry(MachineError, KeyError):
    """Lookup of a corpus entry that does not exist."""


class ParseError(MachineError):
    """Raised on malformed machine files.  Carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line
