import os
import json
import sys
import psutil
from dotenv import load_dotenv

class LabConfig:
    """
    Settings for sieve sizes, survey sampling and corollary parameters.

    Resolution order: environment (and a .env file) over defaults, then the
    optional JSON settings file over both. CLI flags are applied last by the
    runner.
    """
    def __init__(self):
        # Application Metadata
        self.APP_NAME = "Zimmert Lab"
        self.APP_VERSION = "1.0.0"

        # Load environment variables
        load_dotenv()

        # Path Configuration
        self._set_paths()

        # Arithmetic kernel
        self.SIEVE_LIMIT = int(os.getenv('ZLAB_SIEVE_LIMIT', 10_000_000))
        self.MEMO_LIMIT = int(os.getenv('ZLAB_MEMO_LIMIT', 1_000_000))

        # Burgess / corollary parameters
        self.R_MAX = int(os.getenv('ZLAB_R_MAX', 10))
        self.BURGESS_R = int(os.getenv('ZLAB_BURGESS_R', 2))
        self.C = float(os.getenv('ZLAB_C', 0.2))
        self.C_PRIME = float(os.getenv('ZLAB_C_PRIME', 0.24))
        self.EPSILON = float(os.getenv('ZLAB_EPSILON', 0.0))

        # Survey execution
        self.WORKERS = int(os.getenv('ZLAB_WORKERS', self._default_workers()))
        self.BLOCK_SIZE = int(os.getenv('ZLAB_BLOCK_SIZE', 500))
        self.SAMPLE_DENSITY = int(os.getenv('ZLAB_SAMPLE_DENSITY', 200))
        self.EXHAUSTIVE_LIMIT = int(os.getenv('ZLAB_EXHAUSTIVE_LIMIT', 100_000))

        # Load additional settings from config file
        self.load_settings()

    def _set_paths(self):
        """Sets file paths."""
        self.CONFIG_FILE = os.getenv('ZLAB_CONFIG_FILE', "zlab_config.json")
        self.LOG_FILE = os.getenv('ZLAB_LOG_FILE', "")

    @staticmethod
    def _default_workers() -> int:
        return psutil.cpu_count(logical=False) or 1

    def load_settings(self):
        """Loads settings from config file."""
        try:
            if os.path.exists(self.CONFIG_FILE):
                with open(self.CONFIG_FILE, 'r', encoding='utf-8') as f:
                    settings = json.load(f)
                    for key, value in settings.items():
                        if hasattr(self, key):
                            setattr(self, key, value)
        except Exception as e:
            print(f"Warning: Failed to load settings from {self.CONFIG_FILE}: {e}", file=sys.stderr)
