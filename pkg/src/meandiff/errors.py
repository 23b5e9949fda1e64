"""Exception hierarchy shared by every module."""


class MeanDiffError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MeanDiffError, ValueError):
    """An argument is malformed, non-finite or outside its admissible range."""


class DomainError(InputError):
    """A probability vector violates strict positivity or normalisation."""


class UnsupportedPairError(MeanDiffError, KeyError):
    """No closed-form second derivative is tabulated for the requested pair."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class DegenerateRatioError(MeanDiffError, ZeroDivisionError):
    """A beta constant was requested against a pair with vanishing curvature at 1."""


class RationalizationError(MeanDiffError, ValueError):
    """A float could not be matched to a small-denominator rational."""


class ParseError(InputError):
    """Text input (mean spec, chain file, polynomial literal) could not be parsed."""
