class RotvError(Exception):
    """Base class for all rotvlab errors."""

    exit_code = 1


class ConfigError(RotvError):
    exit_code = 2


class ParameterError(RotvError):
    exit_code = 2


class ModelDomainError(RotvError):
    """State left the small-attitude envelope the model is valid in."""

    exit_code = 4


class TrimError(RotvError):
    exit_code = 3


class SynthesisError(RotvError):
    exit_code = 3


class TuningError(RotvError):
    exit_code = 3


class SimulationDiverged(RotvError):
    exit_code = 4

    def __init__(self, message: str, tick: int):
        super().__init__(message)
        self.tick = tick
