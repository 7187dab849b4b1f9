"""Exception types shared across the library."""


class MedialinkError(Exception):
    """Base class for all library errors."""


class ParameterError(MedialinkError):
    """A parameter is outside its documented domain."""


class GeometryError(MedialinkError):
    """Input geometry violates a precondition (self-intersection, corners, ...)."""


class ContainmentError(GeometryError):
    """A configuration is not strictly inside its bounding region."""


class ResolutionError(MedialinkError):
    """Sampling density is too coarse for the requested structure."""


class PoleError(MedialinkError):
    """A matrix Mobius transformation was evaluated at (or too near) a pole.

    Carries the offending eigenvalue when it can be identified.
    """

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class CoverageError(MedialinkError):
    """The linking line field does not cover the requested integration domain."""


class SceneError(MedialinkError):
    """A scene file could not be parsed or validated."""
