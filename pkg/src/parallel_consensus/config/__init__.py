from parallel_consensus.config.config import Config
from parallel_consensus.config.config_option import ConfigOption
from parallel_consensus.config.config_option_handler import (
    ConfigOptionHandler,
)
