"""
Shared helpers: environment settings and logging setup.
"""

from .config import Settings, get_settings
from .logger import configure_logging, get_logger

__all__ = [
    'Settings',
    'get_settings',
    'configure_logging',
    'get_logger',
]
