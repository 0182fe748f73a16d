"""Exception types shared across the package.

Every error carries a short machine-readable code (the class name) used by
the CLI for its ``ERROR <code>:`` output contract.
"""


class BartcsError(Exception):
    """Base class for all package errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class ConstantOutcome(BartcsError):
    """Outcome vector has zero range; prior calibration is impossible."""


class NotBinary(BartcsError):
    """Operation requires a binary exposure."""


class EmptyArm(BartcsError):
    """One exposure arm has no observations."""


class NoApplicableMove(BartcsError):
    """No proposal of the sampled kind exists for this tree."""


class NoGrowableNode(BartcsError):
    """No terminal node has an admissible split."""


class DegenerateSimplex(BartcsError):
    """A simplex update produced an unusable probability vector."""


class SchemeMismatch(BartcsError):
    """Trace was produced under a different modelling scheme."""


class OutOfSupport(BartcsError):
    """Requested exposure level lies outside the observed range."""


class EmptyGrid(BartcsError):
    """Exposure grid contains no points."""


class EmptyTrace(BartcsError):
    """Trace holds no retained draws."""


class ChainLengthMismatch(BartcsError):
    """Convergence diagnostics need >= 2 chains of equal length >= 2."""


class SetNesting(BartcsError):
    """Variable sets violate the required nesting."""


class MissingColumn(BartcsError):
    """A named column is absent from the input file."""


class ParseError(BartcsError):
    """A cell could not be parsed as a decimal number."""

    def __init__(self, row: int, col: str, value: str):
        super().__init__(f"row {row}, column {col!r}: cannot parse {value!r}")
        self.row = row
        self.col = col


class MissingValue(BartcsError):
    """A cell is empty or marked missing."""

    def __init__(self, row: int, col: str):
        super().__init__(f"row {row}, column {col!r}: missing value")
        self.row = row
        self.col = col


class ExposureDomainError(BartcsError):
    """Binary exposure column contains values other than 0 and 1."""


class MissingArtifact(BartcsError):
    """A required artifact file does not exist."""


class UnsupportedForBinary(BartcsError):
    """Operation is defined only for continuous exposures."""


class BadConfig(BartcsError):
    """Configuration file or flag combination is invalid."""
