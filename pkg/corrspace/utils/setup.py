import logging
from datetime import datetime
from pathlib import Path

from corrspace.utils.config import RUNS_BASE_DIR


def setup_logging(verbose: bool = False) -> None:
    """Configure logging for the application.

    Sets up basic logging configuration with timestamp formatting. Records go
    to stderr so that reports written to stdout stay machine-readable.

    Args:
        verbose: Log at DEBUG level instead of INFO
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def setup_run_directory(base_dir: str = RUNS_BASE_DIR) -> Path:
    """Create and return a timestamped directory for the current run."""
    timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
    run_dir = Path(base_dir) / timestamp
    run_dir.mkdir(parents=True, exist_ok=True)
    logging.info("[SETUP] Created run directory: %s", run_dir)
    return run_dir
