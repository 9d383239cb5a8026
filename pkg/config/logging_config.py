# config/logging_config.py
"""
Logging setup for the CLI. Works with a local .env (optional) and the environment.
"""

import logging
import os

from dotenv import load_dotenv

from config.constants import DEFAULT_LOG_LEVEL, ENV_PREFIX

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level=None):
    """Configure root logging to stderr and return the effective level name."""
    load_dotenv()
    level = (level or os.getenv(f"{ENV_PREFIX}LOG_LEVEL") or DEFAULT_LOG_LEVEL).upper()
    if not isinstance(getattr(logging, level, None), int):
        level = DEFAULT_LOG_LEVEL
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
    return level
