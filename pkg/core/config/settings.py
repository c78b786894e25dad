"""
Application settings and configuration.

This module handles runtime configuration, including environment variables
and application settings that can be overridden. Every variable uses the
``RAIE_`` prefix (for example ``RAIE_THREADS`` or ``RAIE_LOG_DIR``).
"""
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from core.config.constants import MAX_WORKERS

# Load environment variables from .env file if it exists
env_path = Path(__file__).parent.parent.parent / '.env'
if env_path.exists():
    load_dotenv(dotenv_path=env_path)


class RuntimeSettings(BaseSettings):
    """Process-level knobs read from the environment."""

    model_config = SettingsConfigDict(env_prefix="RAIE_", extra="ignore")

    threads: Optional[int] = Field(None, ge=1)
    log_dir: Path = Path("logs")
    log_level: str = "INFO"


def get_runtime_settings() -> RuntimeSettings:
    """Read the runtime settings fresh from the environment."""
    return RuntimeSettings()


def resolve_threads(requested: Optional[int] = None) -> int:
    """
    Decide how many worker threads to use.

    Precedence: explicit request, then ``RAIE_THREADS``, then the number of
    available processors.
    """
    if requested is not None:
        return max(1, int(requested))
    env_threads = get_runtime_settings().threads
    if env_threads is not None:
        return env_threads
    return os.cpu_count() or MAX_WORKERS
