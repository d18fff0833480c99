"""Configuration settings for adrsignal."""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


class Config:
    """Application configuration."""

    # Base paths
    BASE_DIR = Path(__file__).parent
    DATA_DIR = Path(os.getenv("ADRSIGNAL_DATA_DIR", str(BASE_DIR / "data")))
    RUNS_DIR = DATA_DIR / "runs"

    # Pipeline config file used when --config is not given
    PIPELINE_CONFIG: str = os.getenv("ADRSIGNAL_CONFIG", "")

    # Logging configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()
    LOG_FILE: str = os.getenv("LOG_FILE", "")

    # Prometheus text exposition written after each CLI run (optional)
    METRICS_FILE: str = os.getenv("ADRSIGNAL_METRICS_FILE", "")

    DEFAULT_SEED: int = int(os.getenv("ADRSIGNAL_SEED", "0"))

    @classmethod
    def ensure_directories(cls):
        """Ensure all required directories exist."""
        cls.RUNS_DIR.mkdir(parents=True, exist_ok=True)
