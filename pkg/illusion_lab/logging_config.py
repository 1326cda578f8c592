import logging
import sys
import time
from typing import Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def configure_logging(quiet: bool = False, level: Optional[int] = None) -> None:
    """Configure root logging once for CLI runs"""
    if level is None:
        level = logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[
            logging.StreamHandler(sys.stdout)
        ],
        force=True,
    )


class ExperimentLogger:
    """Context manager that logs an experiment run with its timing"""

    def __init__(self, kind: str, seed: int, replicates: int = 1, source: Optional[str] = None):
        self.kind = kind
        self.seed = seed
        self.replicates = replicates
        self.source = source
        self.row_count = 0
        self._start_time = 0.0

    def __enter__(self) -> "ExperimentLogger":
        self._start_time = time.time()
        logger.info(f"Experiment: {self.kind} (seed={self.seed}, replicates={self.replicates})")
        if self.source:
            logger.info(f"  Config: {self.source}")
        return self

    def record_rows(self, count: int) -> None:
        self.row_count = count

    def __exit__(self, exc_type, exc, tb) -> bool:
        process_time = time.time() - self._start_time
        if exc is None:
            logger.info(
                f"Finished: {self.kind} - "
                f"rows: {self.row_count} - "
                f"Time: {process_time:.3f}s"
            )
        else:
            logger.error(
                f"Error running {self.kind}: {str(exc)} - "
                f"Time: {process_time:.3f}s"
            )
        return False
