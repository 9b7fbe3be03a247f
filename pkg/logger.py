"""
Logging Module
Centralized logging configuration for library code and CLI runs
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from datetime import datetime
from config import Config
from errors import (
    PackageError, ValidationError, HashMismatch, CheckpointCorrupt,
    FactorTooLarge,
)


class Logger:
    """Application logger with file and console handlers"""

    _instance = None
    _initialized = False

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(Logger, cls).__new__(cls)
        return cls._instance

    def __init__(self):
        if not Logger._initialized:
            self.setup_logging()
            Logger._initialized = True

    def setup_logging(self):
        """Configure logging with file and console handlers"""
        Config.LOGS_DIR.mkdir(parents=True, exist_ok=True)

        self.logger = logging.getLogger('twistvals')
        self.logger.setLevel(getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO))
        self.logger.handlers.clear()

        # Console goes to stderr so CSV on stdout stays clean
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))

        file_handler = RotatingFileHandler(
            Config.LOG_FILE,
            maxBytes=Config.LOG_MAX_SIZE_MB * 1024 * 1024,
            backupCount=Config.LOG_BACKUP_COUNT,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))

        self.logger.addHandler(console_handler)
        self.logger.addHandler(file_handler)

        self.logger.debug(f"{Config.APP_NAME} v{Config.APP_VERSION} logging ready ({Config.APP_ENV})")

        for warning in Config.validate_config():
            self.logger.warning(f"Configuration: {warning}")

    def get_logger(self):
        """Get the configured logger instance"""
        return self.logger


# Create singleton logger instance
_logger_instance = Logger()
logger = _logger_instance.get_logger()


def log_error(message: str, exc_info=False, **kwargs):
    """Log error message"""
    logger.error(message, exc_info=exc_info, extra=kwargs)


class RunAuditLogger:
    """Audit trail of CLI runs"""

    @staticmethod
    def log_run_event(command: str, stage: str, details: dict = None):
        """Log one stage of a run (start, checkpoint, finish)"""
        log_entry = {
            'timestamp': datetime.now().isoformat(),
            'command': command,
            'stage': stage,
            'details': details or {}
        }
        logger.info(f"RUN[{command}]: {stage}", extra={'run': log_entry})


class ErrorHandler:
    """Centralized error handling"""

    @staticmethod
    def handle_exception(error: Exception, context: str = "") -> str:
        """
        Handle exception with logging

        Args:
            error: The exception that occurred
            context: Context information about where the error occurred

        Returns:
            User-facing error message
        """
        error_msg = f"{context}: {error}" if context else str(error)

        if isinstance(error, (PackageError, ValidationError)):
            log_error(error_msg)
        else:
            log_error(error_msg, exc_info=True)

        if isinstance(error, PackageError):
            return f"Package parse error: {error}"
        if isinstance(error, ValidationError):
            return f"Validation failed: {error}"
        if isinstance(error, HashMismatch):
            return f"Checkpoint belongs to a different run: {error}"
        if isinstance(error, CheckpointCorrupt):
            return f"Checkpoint is corrupt: {error}"
        if isinstance(error, (FactorTooLarge, OverflowError)):
            return f"Arithmetic range exceeded: {error}"
        return f"Error: {error_msg}"

    @staticmethod
    def exit_code(error: Exception) -> int:
        """Map an exception to the CLI exit status"""
        if isinstance(error, (PackageError, ValidationError)):
            return 1
        return 2


audit_logger = RunAuditLogger()
error_handler = ErrorHandler()
