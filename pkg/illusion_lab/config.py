"""Configuration settings"""
from typing import Tuple


class Config:
    """Library-wide constants and defaults"""

    # Numerical tolerances
    PSD_TOLERANCE: float = 1e-9  # smallest eigenvalue accepted as PSD
    WEIGHT_SUM_TOLERANCE: float = 1e-9
    SYMMETRY_TOLERANCE: float = 1e-12

    # Confidence intervals use the normal approximation
    CI_Z: float = 1.96

    # Lowess
    DEFAULT_LOWESS_SPAN: float = 0.3

    # LDA ridge escalation; the first rung is replaced by FitConfig.ridge
    LDA_RIDGE_LADDER: Tuple[float, ...] = (1e-8, 1e-6, 1e-4, 1e-2, 1.0)
    LDA_MAX_CONDITION: float = 1e10

    # Full-batch gradient descent on standardized features stays monotone
    # below this step size for the desk-scale problems shipped here
    MLP_STABLE_LEARNING_RATE: float = 0.1
    MLP_INIT_RANGE: float = 0.5

    # Result and model files
    FLOAT_FORMAT: str = '.17g'
    RESULT_COLUMNS: Tuple[str, ...] = ('index', 'metric', 'value', 'ci_half_width', 'label')
    MODEL_FORMAT_TAG: str = 'illusion-lab-model'
    MODEL_FORMAT_VERSION: int = 1

    # Random streams: numpy SeedSequence -> PCG64
    RNG_ALGORITHM: str = 'PCG64'

    # Dataset CSV reserved columns
    TIME_COLUMN: str = 't'
    LATENT_COLUMN: str = 'latent'
    DEFAULT_LABEL_COLUMN: str = 'label'

    # CLI exit codes
    EXIT_OK: int = 0
    EXIT_FAILURE: int = 1
    EXIT_CONFIGURATION: int = 2
    EXIT_INGESTION: int = 3

    @classmethod
    def format_float(cls, value: float) -> str:
        """Render a float with 17 significant digits (lossless for doubles)"""
        return format(float(value), cls.FLOAT_FORMAT)
