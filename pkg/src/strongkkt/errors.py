"""Exception hierarchy shared by all modules."""


class StrongKKTError(Exception):
    """Base class for toolkit errors."""


class ConfigError(StrongKKTError):
    """Malformed or inconsistent run configuration."""


class ComputeError(StrongKKTError):
    """A computation could not be carried out."""


class DimensionMismatch(ComputeError):
    pass


class UnknownCatalogId(ConfigError):
    pass


class InvalidParams(ConfigError):
    pass


class UnknownCase(ConfigError):
    pass


class PointOutsideDomain(ComputeError):
    pass


class PointNotInSet(ComputeError):
    pass


class InfeasiblePoint(ComputeError):
    pass


class EmptyGrid(ComputeError):
    pass


class EmptyInput(ComputeError):
    pass


class BracketTooSmall(ComputeError):
    pass


class UnsupportedDim(ComputeError):
    pass


class NotQuasiconvex(ComputeError):
    pass


class InvariantViolation(ComputeError):
    pass


class UnvalidatedSubgradient(ComputeError):
    pass


class CertificateNotValidated(ComputeError):
    pass


class ActiveLevelMismatch(ComputeError):
    pass


class NoGridMinimizer(ComputeError):
    pass
