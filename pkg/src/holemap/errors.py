"""Exception hierarchy shared across the library.

Everything derives from HoleMapError so callers (and the CLI) can separate
input problems (MapDefinitionError and subclasses, SpecFileError) from
computational limits (DenominatorBlowup, NotMarkov, NoConvergence, ...).
"""


class HoleMapError(Exception):
    pass


# --- map definition / validation -------------------------------------------

class MapDefinitionError(HoleMapError):
    pass


class OverlappingLaps(MapDefinitionError):
    pass


class GapNotHole(MapDefinitionError):
    pass


class NonExpandingLap(MapDefinitionError):
    pass


class ImageEscapesDomain(MapDefinitionError):
    pass


class EndpointNotFixed(MapDefinitionError):
    pass


# --- orbits -----------------------------------------------------------------

class DenominatorBlowup(HoleMapError):
    """An orbit denominator exceeded the configured bit bound.

    Usually signals an aperiodic orbit; callers may retry with truncation.
    """

    def __init__(self, message, step=None, bits=None):
        super().__init__(message)
        self.step = step
        self.bits = bits


# --- weight-polynomial ring --------------------------------------------------

class InexactDivision(HoleMapError):
    pass


# --- kneading / Markov machinery ---------------------------------------------

class NonSquareKneadingMatrix(HoleMapError):
    pass


class NotMarkov(HoleMapError):
    pass


class ImageNotInChain(HoleMapError):
    pass


# --- numerics -----------------------------------------------------------------

class NoConvergence(HoleMapError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NoBracket(HoleMapError):
    pass


class InsufficientData(HoleMapError):
    pass


class CombinatorialBlowup(HoleMapError):
    pass


# --- file formats --------------------------------------------------------------

class SpecFileError(HoleMapError):
    """Map-spec parse error; `field` names the offending location."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
