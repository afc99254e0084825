import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import Optional

from pythonjsonlogger import jsonlogger

from linkfold.config import settings

PLAIN_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'


def _console_formatter() -> logging.Formatter:
    if settings.LOG_FORMAT == "json":
        return jsonlogger.JsonFormatter(
            '%(asctime)s %(levelname)s %(name)s %(message)s',
            rename_fields={'asctime': 'timestamp', 'levelname': 'level'}
        )
    return logging.Formatter('%(levelname)s %(name)s: %(message)s')


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """Root logger: JSON lines on stderr, plus a rotating plain file if LOG_FILE is set.

    Safe to call again; earlier handlers are dropped first.
    """
    root = logging.getLogger()
    for handler in root.handlers[:]:
        root.removeHandler(handler)

    # stdout is reserved for reports
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(_console_formatter())
    root.addHandler(console)

    if settings.LOG_FILE:
        try:
            file_handler = RotatingFileHandler(settings.LOG_FILE, maxBytes=10 * 1024 * 1024, backupCount=3)
            file_handler.setFormatter(logging.Formatter(PLAIN_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
            root.addHandler(file_handler)
        except OSError as e:
            root.warning(f"[Logging] file logging disabled for {settings.LOG_FILE}: {e}")

    root.setLevel((level or settings.LOG_LEVEL).upper())
    return root
