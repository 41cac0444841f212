class OpsysError(ValueError):
    """Base class for every error raised by opsys."""


class DimensionMismatch(OpsysError):
    pass


class FieldMismatch(OpsysError):
    pass


class NotHermitian(OpsysError):
    pass


class IndexOutOfRange(OpsysError):
    pass


class ZeroSpan(OpsysError):
    pass


class UnsupportedSystem(OpsysError):
    pass


class DomainViolation(OpsysError):
    pass


class PreconditionViolated(OpsysError):
    pass


class ConfigError(OpsysError):
    pass
