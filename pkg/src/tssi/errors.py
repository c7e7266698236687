"""Exception types shared across the toolkit."""

from __future__ import annotations


class TssiError(Exception):
    """Base class for every toolkit error."""


class CycleDetected(TssiError):
    """The skeleton graph contains a cycle."""


class Disconnected(TssiError):
    """The skeleton graph does not reach every joint from the root."""


class NonPositiveFrameSize(TssiError):
    """Frame width or height is zero or negative."""


class MissingPoseBlock(TssiError):
    """A frame without a pose block reached an operation that requires one."""


class EmptySequence(TssiError):
    """No usable frames remain in a sequence."""


class EmptyOrder(TssiError):
    """A joint order with zero entries was supplied."""


class FactorOutOfRange(TssiError):
    """Scale factor outside the allowed [0.5, 1.0] interval."""


class InvalidMirrorTable(TssiError):
    """Mirror map is not an involution over the joint ids."""


class MissingStats(TssiError):
    """Dataset statistics required by an operation are absent."""


class EmptySplit(TssiError):
    """The requested manifest split contains no usable samples."""


class SchemaVersionMismatch(TssiError):
    """File declares a schema version this toolkit does not understand."""


class IoFailure(TssiError):
    """Reading or writing an artifact failed."""


class ParseError(TssiError):
    """A structured input file could not be parsed.

    Carries the 1-based line number when the failure is tied to a line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
