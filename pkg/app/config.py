import logging
import os
from typing import List

from dotenv import load_dotenv

load_dotenv()


class Settings:
    """Process-wide settings read from the environment (.env supported)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialize()
        return cls._instance

    def _initialize(self):
        self.reload()

    def reload(self):
        self.output_dir = os.getenv("WAVES_OUTPUT_DIR", "./output")
        self.workers = int(os.getenv("WAVES_WORKERS", "1"))
        self.log_level = os.getenv("WAVES_LOG_LEVEL", "INFO").upper()
        origins = os.getenv("WAVES_CORS_ORIGINS", "*")
        self.cors_origins: List[str] = [o.strip() for o in origins.split(",") if o.strip()]


def configure_logging(level: str = None):
    """Called once by the entry points."""
    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# Singleton instance
settings = Settings()
