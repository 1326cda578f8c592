"""Error hierarchy for illusion-lab"""


class IllusionLabError(ValueError):
    """Base class for all library errors"""


class ConstraintError(IllusionLabError):
    """A parameter lies outside its admissible range"""


class ValidityError(IllusionLabError):
    """A matrix is not positive (semi)definite or a factorization failed"""


class PreconditionError(IllusionLabError):
    """An operation was called with inputs violating its preconditions"""


class DegenerateInputError(IllusionLabError):
    """Inputs or outputs collapse to a degenerate case (zero variance, empty set)"""


class ShapeError(IllusionLabError):
    """Feature dimensionality does not match the fitted model"""


class UndefinedRatioError(IllusionLabError):
    """A ratio has a zero denominator"""


class ConfigurationError(IllusionLabError):
    """Experiment configuration is invalid or references unknown presets"""


class IngestionError(IllusionLabError):
    """A dataset file could not be read"""


class UnsupportedClassError(IngestionError):
    """The label column does not hold exactly two classes"""
