import logging
import os

from dotenv import load_dotenv

# load environment variables from .env file
load_dotenv()

# numerical defaults
DEFAULT_TOL = float(os.getenv("PARAQED_TOL", "1e-10"))
DEFAULT_M_MAX = int(os.getenv("PARAQED_M_MAX", "20"))
DEFAULT_N_MAX = int(os.getenv("PARAQED_N_MAX", "400"))

# worker pool - lazy validation so tests can import without the variable
PARAQED_THREADS = os.getenv("PARAQED_THREADS")


def get_thread_count(requested: int | None = None) -> int:
    """resolve worker count: explicit flag, then PARAQED_THREADS, then hardware"""
    if requested is not None:
        if requested < 1:
            raise ValueError(f"thread count must be >= 1, got {requested}")
        return requested
    if PARAQED_THREADS:
        try:
            count = int(PARAQED_THREADS)
        except ValueError as e:
            raise ValueError(
                f"PARAQED_THREADS must be a positive integer, got {PARAQED_THREADS!r}"
            ) from e
        if count < 1:
            raise ValueError(f"PARAQED_THREADS must be a positive integer, got {count}")
        return count
    return os.cpu_count() or 1


# database configuration (mode cache and run log)
DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///paraqed_cache.db")

# logging configuration
LOG_LEVEL = os.getenv("PARAQED_LOG_LEVEL", "INFO").upper()

logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    level=getattr(logging, LOG_LEVEL, logging.INFO),
)

logger = logging.getLogger(__name__)
