"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent user input (files, flags, configs)."""


class UnsupportedOperation(ValueError):
    """Operation not defined for the given activation order."""


class NumericalError(ArithmeticError):
    """A numerical procedure diverged or produced non-finite values."""


class TrainingError(NumericalError):
    def __init__(self, epoch: int, message: str = "objective became non-finite"):
        super().__init__(f"{message} at epoch {epoch}")
        self.epoch = epoch
