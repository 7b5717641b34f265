"""
명령줄 모듈
src/cli/__init__.py

실행은 src/main.py 에서 합니다: python -m src.main <subcommand> --config <ini>
"""

from .commands import (
    COMMANDS, OutputPaths, atn_label, cmd_chain, cmd_eval, cmd_fgsm, cmd_train_atn, cmd_train_classifier,
    cmd_transfer, derive_seed, run_jobs,
)
from .config_file import ExperimentConfig, load_config, parse_float_list, parse_int_list

__all__ = [
    'COMMANDS', 'OutputPaths', 'atn_label', 'derive_seed', 'run_jobs',
    'cmd_train_classifier', 'cmd_train_atn', 'cmd_eval', 'cmd_transfer', 'cmd_chain', 'cmd_fgsm',
    'ExperimentConfig', 'load_config', 'parse_int_list', 'parse_float_list',
]
