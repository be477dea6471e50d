import logging

from .checks import CheckRecord, run_checks
from .commands import cmd_evolve, cmd_fibering, cmd_groundstate, cmd_profile_check, cmd_verify
from .config import Config, load_config
from .main import build_parser, main

logger = logging.getLogger(__name__)

__all__ = [
    "CheckRecord",
    "Config",
    "build_parser",
    "cmd_evolve",
    "cmd_fibering",
    "cmd_groundstate",
    "cmd_profile_check",
    "cmd_verify",
    "load_config",
    "main",
    "run_checks",
    "logger",
]
