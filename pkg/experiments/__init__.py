"""
Experiment files, the commands behind the CLI and their result writers.
"""

from .config import (
    ConfigError,
    ExperimentConfig,
    load_config,
    apply_overrides
)
from .commands import (
    COMMANDS,
    analyze_point,
    eta_thresholds,
    cmd_analyze,
    cmd_simulate,
    cmd_sweep,
    cmd_region
)
from .output import (
    write_rows,
    write_record,
    sibling_path
)

__all__ = [
    # Config
    'ConfigError',
    'ExperimentConfig',
    'load_config',
    'apply_overrides',

    # Commands
    'COMMANDS',
    'analyze_point',
    'eta_thresholds',
    'cmd_analyze',
    'cmd_simulate',
    'cmd_sweep',
    'cmd_region',

    # Output
    'write_rows',
    'write_record',
    'sibling_path'
]
