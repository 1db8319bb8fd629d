"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid, inconsistent, or unknown configuration content."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss; carries diagnostic state."""

    def __init__(self, message: str, *, epoch: int, phase: str, step: int, loss: float):
        super().__init__(message)
        self.epoch = epoch
        self.phase = phase
        self.step = step
        self.loss = loss
