"""Typed errors raised by the fairgap modules.

Library code raises these; the experiment layer turns them into status
dictionaries and the CLI turns them into exit codes.
"""


class FairgapError(Exception):
    """Base class for every fairgap failure."""


class ConfigError(FairgapError):
    pass


class SchemaError(FairgapError):
    pass


class DegenerateColumnError(FairgapError):
    pass


class GroupError(FairgapError):
    pass


class SplitError(GroupError):
    def __init__(self, split_name: str, message: str):
        super().__init__(f"{split_name} split: {message}")
        self.split_name = split_name


class DimensionError(FairgapError):
    pass


class DomainError(FairgapError):
    pass


class NotDifferentiableError(FairgapError):
    pass


class TrainingError(FairgapError):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class SingularLambdaError(FairgapError):
    pass


class SamplerError(FairgapError):
    def __init__(self, check_name: str, message: str):
        super().__init__(f"{check_name}: {message}")
        self.check_name = check_name


DATA_ERRORS = (SchemaError, DegenerateColumnError, GroupError, DimensionError, FileNotFoundError)
TRAINING_ERRORS = (TrainingError, NotDifferentiableError, SingularLambdaError)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRAINING = 3
EXIT_VERIFICATION = 4


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, SamplerError):
        return EXIT_VERIFICATION
    if isinstance(error, DATA_ERRORS):
        return EXIT_DATA
    if isinstance(error, TRAINING_ERRORS):
        return EXIT_TRAINING
    return EXIT_USAGE
