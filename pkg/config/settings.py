"""
Runtime configuration for the WSC toolkit.
"""

import logging
import os

from dotenv import load_dotenv


class Settings:
    """Settings read from the environment (and a .env file when present)."""

    def __init__(self):
        """Initialize settings from environment variables."""

        load_dotenv()

        self.threads = self._int('WSC_THREADS', 1)
        self.max_signals = self._int('WSC_MAX_SIGNALS', 200_000)
        self.max_attempts = self._int('WSC_MAX_ATTEMPTS', 20)
        self.log_level = os.getenv('WSC_LOG_LEVEL', 'WARNING').upper()
        self.output_dir = os.getenv('WSC_OUTPUT_DIR', '.')

        self._validate()

    @staticmethod
    def _int(name: str, default: int) -> int:
        raw = os.getenv(name)
        if raw is None or raw.strip() == '':
            return default
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"{name} must be an integer (got '{raw}')") from None

    def _validate(self):
        """Validate configuration settings."""
        if self.threads < 1:
            raise ValueError(f"WSC_THREADS must be >= 1 (got {self.threads})")
        if self.max_signals < 1:
            raise ValueError(f"WSC_MAX_SIGNALS must be >= 1 (got {self.max_signals})")
        if self.max_attempts < 1:
            raise ValueError(f"WSC_MAX_ATTEMPTS must be >= 1 (got {self.max_attempts})")
        if not isinstance(logging.getLevelName(self.log_level), int):
            raise ValueError(f"WSC_LOG_LEVEL '{self.log_level}' is not a logging level")
