"""Exception types raised across the package."""


class CausalCogError(Exception):
    """Base class for all package errors."""


# scm
class ScmError(CausalCogError):
    pass


class CyclicGraph(ScmError):
    pass


class IllegalParent(ScmError):
    pass


class IncompleteTable(ScmError):
    pass


class UnnormalizedNoise(ScmError):
    pass


class NonInjectiveEmission(ScmError):
    pass


class TooLarge(ScmError):
    pass


class NotAFactor(ScmError):
    pass


class OutOfDomain(ScmError):
    pass


# disentangle
class DisentangleError(CausalCogError):
    pass


class DomainMismatch(DisentangleError):
    pass


class TooFewCodes(DisentangleError):
    pass


class AssignmentInvalid(DisentangleError):
    pass


class Unnormalized(DisentangleError):
    pass


class TooFewSamples(DisentangleError):
    pass


# env / agents
class OutOfRange(CausalCogError, ValueError):
    pass


class ZeroLikelihood(CausalCogError):
    pass


class Empty(CausalCogError, ValueError):
    pass


class ShapeMismatch(CausalCogError, ValueError):
    pass


class ConfigError(CausalCogError):
    """Bad experiment configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# replay
class ReplayError(CausalCogError):
    pass


class BrokenChain(ReplayError):
    pass


class EmptySources(ReplayError):
    pass


class MissingBehaviorProb(ReplayError):
    pass


class NaturalSourceRejected(ReplayError):
    """Raised whenever action-free (Natural) data reaches a gradient computation."""


class MissingSource(ReplayError):
    pass


class TaskMismatch(CausalCogError):
    pass
