"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A parameter, config file entry, or scenario setting violates an invariant."""


class SimulationError(RuntimeError):
    """Integration failed; carries the records produced so far for post-mortem.

    Attributes
    ----------
    records : list
        Partial record stream up to and including the failing step.
    """

    def __init__(self, message, records=None):
        super().__init__(message)
        self.records = records if records is not None else []
