"""Exception types shared across the package."""


class CircleEntropyError(Exception):
    """Base class for all package errors."""


class MapValidationError(CircleEntropyError):
    """A primitive map fails its construction invariants."""


class ValidationError(CircleEntropyError):
    """A domain object fails its construction invariants."""


class ConfigurationError(CircleEntropyError):
    """A scenario configuration is malformed or internally inconsistent."""


class ResourceLimitError(CircleEntropyError):
    """Ball enumeration exceeded the configured size cap."""

    def __init__(self, depth_reached: int, size: int, cap: int):
        self.depth_reached = depth_reached
        self.size = size
        self.cap = cap
        super().__init__(
            f"ball size {size} exceeds cap {cap} at depth {depth_reached}"
        )


class EmptyRestrictionError(CircleEntropyError):
    """The candidate grid does not meet the restriction set."""


class ExactOracleCapError(CircleEntropyError):
    """Exact separated-set search refused; instance too large, use greedy."""


class InconsistentGapError(CircleEntropyError):
    """A gap stabilizer candidate has a fixed point inside the gap."""


class GapImageNotFoundError(CircleEntropyError):
    """The image of a gap could not be matched to a gap of the approximation."""


class EscapedGapError(CircleEntropyError):
    """A stabilizer orbit left the gap it was supposed to preserve."""


class UnboundedDomainCountError(CircleEntropyError):
    """Fundamental-domain iteration exceeded the configured cap."""


class CensoredValueError(CircleEntropyError):
    """A distortion staircase was queried beyond its computed range."""


class ConstructionGapError(CircleEntropyError):
    """No usable point of the approximation between two gap components."""
