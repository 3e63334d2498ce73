"""Exception types shared across the toolkit.

Callers (the optimizer, the CLI) branch on these, so every failure mode that
is part of a module contract has a dedicated class instead of a bare
ValueError. ``SingularConfiguration`` is the one "domain" error the CLI maps
to exit code 1; everything else is treated as a usage / input problem.
"""


class DepthlensError(Exception):
    """Base class for all toolkit errors."""


class SingularConfiguration(DepthlensError):
    """A lens/camera arrangement hits a zero denominator (no finite image)."""


class DegenerateRegion(DepthlensError):
    """A lens region does not overlap the image frame at all."""


class BadLevel(DepthlensError):
    """Discrete attack level outside the supported 1..9 range."""


class FiducialNotFound(DepthlensError):
    """Thresholding found no blob large enough to measure."""


class ParseError(DepthlensError):
    """Malformed image/map file.

    ``byte_offset`` points at (or near) the offending byte so truncated
    headers are easy to locate.
    """

    def __init__(self, message: str, byte_offset: int | None = None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class DimensionMismatch(DepthlensError):
    """Loaded map dimensions disagree with what the caller expected."""


class EmptyMask(DepthlensError):
    """A masked reduction was asked for but no valid pixel is selected."""


class NonPositiveDenominator(DepthlensError):
    """Metric denominator (benign or target value) must be positive."""


class TooSmall(DepthlensError):
    """Image smaller than the minimum a filter/detector needs."""
