"""
Configuration Management Module
Handles run settings and environment variables
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Config:
    """Main configuration class"""

    # Base paths
    BASE_DIR = Path(__file__).parent
    PACKAGES_DIR = BASE_DIR / "packages"
    LOGS_DIR = Path(os.getenv("LOGS_DIR", str(BASE_DIR / "logs")))

    # Application
    APP_NAME = os.getenv("APP_NAME", "twistvals")
    APP_VERSION = os.getenv("APP_VERSION", "1.0.0")
    APP_ENV = os.getenv("APP_ENV", "development")

    # Output
    OUTPUT_DIR = Path(os.getenv("OUTPUT_DIR", str(BASE_DIR / "output")))
    CHECKPOINT_DIR = Path(os.getenv("CHECKPOINT_DIR", str(BASE_DIR / "checkpoints")))
    FLOAT_DIGITS = int(os.getenv("FLOAT_DIGITS", "17"))

    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE = Path(os.getenv("LOG_FILE", str(LOGS_DIR / "twistvals.log")))
    LOG_MAX_SIZE_MB = int(os.getenv("LOG_MAX_SIZE_MB", "10"))
    LOG_BACKUP_COUNT = int(os.getenv("LOG_BACKUP_COUNT", "5"))

    # Parallelism and checkpoints
    THREADS = int(os.getenv("TWISTVALS_THREADS", "1"))
    THETA_CHUNKS = int(os.getenv("THETA_CHUNKS", "64"))
    CHECKPOINT_INTERVAL = int(os.getenv("CHECKPOINT_INTERVAL", "4"))
    CHECKPOINT_BACKUPS = int(os.getenv("CHECKPOINT_BACKUPS", "3"))

    # Arithmetic limits
    LLL_DELTA = os.getenv("LLL_DELTA", "99/100")
    FACTOR_LIMIT = int(os.getenv("FACTOR_LIMIT", str(2 ** 63)))
    NAIVE_BOX_LIMIT = int(float(os.getenv("NAIVE_BOX_LIMIT", "1e8")))

    @classmethod
    def ensure_directories(cls):
        """Create output directories if they don't exist"""
        for directory in (cls.LOGS_DIR, cls.OUTPUT_DIR, cls.CHECKPOINT_DIR):
            directory.mkdir(parents=True, exist_ok=True)

    @classmethod
    def is_production(cls) -> bool:
        """Check if running in production environment"""
        return cls.APP_ENV.lower() == "production"

    @classmethod
    def validate_config(cls) -> list[str]:
        """Validate configuration and return list of errors"""
        errors = []

        if cls.THREADS < 1:
            errors.append("TWISTVALS_THREADS must be at least 1")
        if cls.THETA_CHUNKS < 1:
            errors.append("THETA_CHUNKS must be at least 1")
        if cls.CHECKPOINT_INTERVAL < 1:
            errors.append("CHECKPOINT_INTERVAL must be at least 1")
        if cls.FACTOR_LIMIT > 2 ** 63:
            errors.append("FACTOR_LIMIT above 2**63 is not supported")

        return errors
