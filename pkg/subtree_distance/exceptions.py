"""
Error hierarchy for subtree distance reconstruction.

Every error carries an optional ``witness`` dict that the recognition pipeline
copies verbatim into a rejecting RecognitionReport.
"""

from typing import Any


class SubtreeDistanceError(Exception):
    """Base class for all errors raised by this package"""

    def __init__(self, message: str, witness: dict[str, Any] | None = None):
        super().__init__(message)
        self.witness = witness


# Input handling

class ParseError(SubtreeDistanceError):
    """Malformed matrix text"""


class ValidationError(SubtreeDistanceError):
    """Matrix violates symmetry, diagonal, sign, finiteness or label uniqueness.

    Not a ValueError subclass, so it propagates out of pydantic validators unwrapped.
    """


class ConfigurationError(SubtreeDistanceError):
    """Invalid settings or command-line parameters"""


# Tree structure

class UnknownVertex(SubtreeDistanceError):
    pass


class EmptySet(SubtreeDistanceError):
    pass


class OffsetOutOfRange(SubtreeDistanceError):
    pass


# Reconstruction

class NegativeLength(SubtreeDistanceError):
    """Three-point formula produced a negative split or pendant length"""


class NotTreeMetric(SubtreeDistanceError):
    pass


class DegenerateInstance(SubtreeDistanceError):
    pass


class NotSubtreeDistance(SubtreeDistanceError):
    pass


class EmptyImage(NotSubtreeDistance):
    """A non-leaf object has every interval empty"""


class Disconnected(NotSubtreeDistance):
    """A non-leaf object's intervals do not form a connected subtree"""


class MissingObject(SubtreeDistanceError):
    pass


# Instance generation

class InvalidRange(SubtreeDistanceError):
    pass


class SizeOutOfRange(SubtreeDistanceError):
    pass


class InfeasibleParameters(SubtreeDistanceError):
    pass
