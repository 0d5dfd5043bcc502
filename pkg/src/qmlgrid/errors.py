"""Error taxonomy shared across the package.

ConfigurationError: a config value is out of its documented range.
UsageError: a call violates an operation's preconditions.
IngestionError: a data file cannot be parsed or fails verification.
TrainingDivergedError: an optimizer produced NaN or ran away.
"""


class ConfigurationError(ValueError):
    pass


class UsageError(ValueError):
    pass


class IngestionError(ValueError):
    pass


class TrainingDivergedError(RuntimeError):
    pass
