"""
Logging module.
"""

import logging
from datetime import datetime, timezone
from colorlog import ColoredFormatter
import pytz
from config import LOG_LEVEL, LOG_TIMEZONE


def configure_logging(logger_name="crossview_pose"):
    """
    Set up logging with colorized output and timestamps in the configured timezone.
    """
    logger = logging.getLogger(logger_name)
    if logger.hasHandlers():
        # Avoid re-adding handlers if the logger is already configured
        return logger

    logger.setLevel(LOG_LEVEL)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(LOG_LEVEL)

    class ZonedTimeFormatter(ColoredFormatter):
        """Log formatter that renders timestamps in LOG_TIMEZONE with colorized output"""

        def formatTime(self, record, datefmt=None):
            zone = pytz.timezone(LOG_TIMEZONE)
            utc_dt = datetime.fromtimestamp(record.created, tz=timezone.utc)
            # Use ISO 8601 format
            return utc_dt.astimezone(zone).isoformat()

    # Define the formatter with color and PID
    formatter = ZonedTimeFormatter(
        "%(log_color)s%(asctime)s - PID %(process)d - %(name)s - %(levelname)s - %(message)s",
        log_colors={
            "DEBUG": "white",
            "INFO": "green",
            "WARNING": "yellow",
            "ERROR": "red",
            "CRITICAL": "bold_red",
        },
    )
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    return logger
