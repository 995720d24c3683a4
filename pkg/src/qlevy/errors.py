"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: configuration-style
errors (bad kernel spec, size guards, bad config files) exit 1, while
numerical-domain errors (grid alignment, depth caps) exit 2.
"""


class QLevyError(Exception):
    """Base class for all package-specific errors."""


class KernelSpecError(QLevyError, ValueError):
    """Invalid kernel parameters or unparseable kernel spec string."""


class SizeLimitError(QLevyError, ValueError):
    """An enumeration or quadrature guard was exceeded."""


class AlignmentError(QLevyError, ValueError):
    """An interval endpoint is not aligned with the discretization grid."""


class DepthCapError(QLevyError, ValueError):
    """The particle-level cap is too small for the requested moment order."""


class ConfigError(QLevyError, ValueError):
    """Malformed CLI configuration (flags, config file, case file)."""
