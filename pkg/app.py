"""
Command-line entry point.
"""

import json
import logging
import sys
from config import EXIT_CONFIG_ERROR, EXIT_DATA_ERROR, EXIT_OK
from utils.command_parser import CommandParser
from utils.errors import ConfigError, DataError
from utils.logging import configure_logging

logging.root.handlers = []
logger = configure_logging()


def main(argv=None):
    """
    Run one subcommand and map failures to exit codes.

    Returns:
    - int: 0 on success, 2 on configuration errors, 3 on data errors
    """
    try:
        CommandParser().execute_command(argv)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG_ERROR
    except (DataError, OSError, json.JSONDecodeError) as e:
        logger.error("Data error: %s", e)
        return EXIT_DATA_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
