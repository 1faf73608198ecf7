class InputError(Exception):
    """raised when an input file or a flag is invalid"""

    pass


class DatasetParseError(InputError):
    """raised when a dataset file cannot be parsed"""

    pass


class IncompletePanelError(InputError):
    """raised when an individual misses a measurement time"""

    def __init__(self, individual_id):
        self.individual_id = individual_id
        super().__init__(f"incomplete panel: {individual_id}")


class ScoreRangeError(InputError):
    """raised when a score falls outside the dataset bounds"""

    pass


class SchemaError(InputError):
    """raised when a model file has the wrong schema version or a malformed field"""

    pass


class ScenarioError(InputError):
    """raised when a scenario spec is invalid"""

    pass


class ConfigError(InputError):
    """raised when command line flags are invalid"""

    pass


class GridMismatchError(Exception):
    """raised when a model and a dataset do not share the same time grid"""

    pass


class InvalidDegreeError(ValueError):
    """raised when the polynomial degree is outside 0..3"""

    pass


class InvalidGroupError(IndexError):
    """raised when a group index does not exist in the model"""

    pass


class UnknownIndividualError(KeyError):
    """raised when an individual id is not in the dataset"""

    pass


class EmptyGroupError(Exception):
    """raised when a group has no modally assigned member"""

    def __init__(self, group):
        self.group = group
        super().__init__(f"empty group: Group #{group + 1}")


class NumericError(ArithmeticError):
    """raised when a curve evaluates to a non-finite value"""

    pass


class FitError(Exception):
    """raised when a trajectory model cannot be fitted"""

    pass


class InsufficientDataError(FitError):
    """raised when there are not more individuals than groups"""

    pass


class DegenerateFitError(FitError):
    """raised when every EM start failed or the grid is too short for the degree"""

    pass
