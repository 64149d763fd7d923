"""Exception types shared across the package."""


class VsmtuneError(Exception):
    """Base class for all vsmtune errors."""


class ValidationError(VsmtuneError):
    """A network description or input file is malformed."""


class ParameterError(VsmtuneError):
    """Device coefficients violate their physical requirements."""


class ConfigurationError(VsmtuneError):
    """A solver or run configuration is inconsistent."""


class StabilityError(VsmtuneError):
    """A computation requires a Hurwitz system matrix but did not get one."""
