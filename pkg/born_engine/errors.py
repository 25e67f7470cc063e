"""Error types raised by born_engine.

Every error carries the name of the module that raised it and a short tag,
so the command line can report ``error [solver:NoConvergence]: ...`` and pick
an exit code without inspecting messages.
"""


class BornEngineError(Exception):
    """Base class for all library errors"""

    module = "born_engine"
    tag = "Error"
    exit_code = 1

    def __init__(self, message="", *, module=None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def describe(self) -> str:
        return f"[{self.module}:{self.tag}] {self}"


# core-math

class DimensionMismatchError(BornEngineError):
    module = "core"
    tag = "DimensionMismatch"


class BasisMismatchError(BornEngineError):
    module = "core"
    tag = "BasisMismatch"


class ExactClosureError(BornEngineError):
    module = "core"
    tag = "ExactClosure"


class IndexOutOfRangeError(BornEngineError):
    module = "core"
    tag = "IndexOutOfRange"


class InvalidAmplitudeError(BornEngineError):
    module = "core"
    tag = "InvalidAmplitude"


# model

class InvalidModelError(BornEngineError):
    module = "model"
    tag = "InvalidModel"


class ZeroStateError(BornEngineError):
    module = "model"
    tag = "ZeroState"


class InvalidPartitionError(BornEngineError):
    module = "model"
    tag = "InvalidPartition"


class InvalidWeightsError(BornEngineError):
    module = "model"
    tag = "InvalidWeights"


# equivalence

class IncompatibleTransformationError(BornEngineError):
    module = "equivalence"
    tag = "IncompatibleTransformation"


class NotEqualNormError(BornEngineError):
    module = "equivalence"
    tag = "NotEqualNorm"


# solver

class ZeroAmplitudeError(BornEngineError):
    module = "solver"
    tag = "ZeroAmplitude"


class NotRationalError(BornEngineError):
    module = "solver"
    tag = "NotRational"


class RefinementTooLargeError(BornEngineError):
    module = "solver"
    tag = "RefinementTooLarge"
    exit_code = 2


class NoConvergenceError(BornEngineError):
    module = "solver"
    tag = "NoConvergence"
    exit_code = 2


class InvalidPError(BornEngineError):
    module = "solver"
    tag = "InvalidP"


class InconsistentSystemError(BornEngineError):
    module = "solver"
    tag = "Inconsistent"
    exit_code = 2


# decision

class PreconditionViolatedError(BornEngineError):
    module = "decision"
    tag = "PreconditionViolated"


class NonAdditivePayoffError(BornEngineError):
    module = "decision"
    tag = "NonAdditivePayoff"


# sim

class ZeroExpectedProbabilityError(BornEngineError):
    module = "sim"
    tag = "ZeroExpectedProbability"


# cli

class MalformedInputError(BornEngineError):
    module = "cli"
    tag = "MalformedInput"

    def __init__(self, message="", *, pointer="", module=None):
        super().__init__(f"{pointer or '/'}: {message}", module=module)
        self.pointer = pointer or "/"
