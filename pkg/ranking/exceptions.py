"""
Exception hierarchy for the ranking app.
"""


class RankingError(Exception):
    """Base class for every error raised by the ranking app."""


class InvalidVertexError(RankingError, ValueError):
    """A vertex id is out of range, or a self-loop was requested."""


class ContractViolation(RankingError):
    """An operation was called with inputs that break its precondition."""


class SizeLimitError(RankingError):
    """An exhaustive computation was refused because the input is too large."""


class ConfigError(RankingError, ValueError):
    """A configuration value is missing, malformed or violates an invariant."""


class ConstructionError(RankingError, ValueError):
    """A structure (e.g. a quadratic residue tournament) cannot be built."""


class TooSmallError(RankingError):
    """The working tournament has fewer vertices than the gadget."""


class InvalidQueryError(RankingError, ValueError):
    """A preference query compares a vertex with itself."""


class FormatError(RankingError, ValueError):
    """A text artifact does not follow its file format."""
