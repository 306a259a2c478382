"""
Exception hierarchy for slabforge.

Every failure the library raises on purpose derives from SlabforgeError so the
command-line front end can map it onto an exit code.
"""

from typing import Optional


class SlabforgeError(Exception):
    """Base class for all slabforge errors."""


class MeshError(SlabforgeError):
    """Invalid spatial mesh or violated construction precondition."""


class MotionRejected(SlabforgeError):
    """A motion map produced a non-positive element."""

    def __init__(self, message: str, element: Optional[int] = None, area: Optional[float] = None):
        super().__init__(message)
        self.element = element
        self.area = area


class RotationBoundError(SlabforgeError):
    """Rotation within one slab reached half the angular pitch."""

    def __init__(self, delta_theta: float, pitch: float):
        super().__init__(
            f"slab rotation |dtheta|={abs(delta_theta):.6g} must stay below "
            f"pitch/2={0.5 * pitch:.6g}; reduce the time step"
        )
        self.delta_theta = delta_theta
        self.pitch = pitch


class ConformityError(SlabforgeError):
    """A space-time slab failed validation."""

    def __init__(self, report):
        super().__init__(f"slab is not conforming: {report.summary()}")
        self.report = report


class BlockDerivationError(SlabforgeError):
    """No admissible tetrahedralization exists for a block boundary pattern."""


class DivergenceError(SlabforgeError):
    """An iteration exceeded its cap without meeting the tolerance."""

    def __init__(self, what: str, iterations: int, residual: float):
        super().__init__(f"{what} did not converge in {iterations} iterations (residual {residual:.3e})")
        self.what = what
        self.iterations = iterations
        self.residual = residual


class ConfigError(SlabforgeError):
    """Configuration file problem, with the offending line when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class FormatError(SlabforgeError):
    """Native file could not be parsed."""

    def __init__(self, message: str, offset: Optional[int] = None):
        suffix = f" (byte offset {offset})" if offset is not None else ""
        super().__init__(message + suffix)
        self.offset = offset


class UnsupportedVersionError(FormatError):
    """Native file header names a version this reader does not know."""
