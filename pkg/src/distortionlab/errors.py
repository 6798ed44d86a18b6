"""Exception types raised across the package."""


class DistortionLabError(Exception):
    """Base class for every error raised by distortionlab."""


class InvalidInputError(DistortionLabError, ValueError):
    pass


# metric construction / validation
class NonSquareError(InvalidInputError):
    pass


class AsymmetricInputError(InvalidInputError):
    pass


class NegativeDistanceError(InvalidInputError):
    pass


class DisconnectedGraphError(InvalidInputError):
    pass


class DimensionMismatchError(InvalidInputError):
    pass


class TooLargeForExactError(InvalidInputError):
    pass


class InvalidRadiiError(InvalidInputError):
    pass


class DegenerateSubsetError(InvalidInputError):
    pass


# elections
class UnknownPointError(InvalidInputError):
    pass


class NoEmbeddingError(DistortionLabError):
    pass


class GammaOutOfRangeError(InvalidInputError):
    pass


class CoincidentCandidatesError(InvalidInputError):
    pass


class LemmaViolation(DistortionLabError):
    """A proven inequality failed on a concrete instance."""


# rules
class TooManyCandidatesError(InvalidInputError):
    pass


class MalformedSequenceError(InvalidInputError):
    pass


class InternalInvariantBroken(DistortionLabError, RuntimeError):
    pass


# dynamics
class AlphaOutOfRangeError(InvalidInputError):
    pass


# worst case LP
class SameCandidateError(InvalidInputError):
    pass


class SolverFailure(DistortionLabError, RuntimeError):
    pass


class UnboundedModel(SolverFailure):
    pass


# generators
class HeightTooLargeError(InvalidInputError):
    pass


class OddNError(InvalidInputError):
    pass


class EpsOutOfRangeError(InvalidInputError):
    pass


class NonpositiveDeltaError(InvalidInputError):
    pass


class InvalidSizeError(InvalidInputError):
    pass


class UnknownTheoremError(InvalidInputError):
    pass


# experiment harness
class ConfigParseError(DistortionLabError):
    pass


class InstanceLoadError(DistortionLabError):
    pass
