"""Exception types shared across the package."""


class PkslabError(Exception):
    pass


class NonZeroMeanError(PkslabError):
    """Poisson solve requested for a right-hand side with nonzero mean."""


class StepRejected(PkslabError):
    """Time step violates the CFL precondition; caller should reduce dt."""


class UnresolvedError(PkslabError):
    """The spectral representation can no longer be trusted."""


class InsufficientDataError(PkslabError):
    pass


class NonPositiveDataError(PkslabError):
    pass


class ConfigError(PkslabError):
    pass


class UnknownKeyError(ConfigError):
    def __init__(self, key):
        super().__init__(f"unknown config key: {key!r}")
        self.key = key
