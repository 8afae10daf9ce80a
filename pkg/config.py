"""
Configuration
Environment-driven settings for the kNN engine and its benchmark harness
"""

import os
import re

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

_SIZE_PATTERN = re.compile(r'^\s*(\d+(?:\.\d+)?)\s*([KMGT]?)B?\s*$', re.IGNORECASE)
_SIZE_UNITS = {'': 1, 'K': 1 << 10, 'M': 1 << 20, 'G': 1 << 30, 'T': 1 << 40}


def parse_size(value):
    """
    Convert a human size string ("512M", "8G", "1024") into bytes

    Raises:
        ValueError: if the string is not a size
    """
    match = _SIZE_PATTERN.match(str(value))
    if not match:
        raise ValueError(f'Invalid size value: {value!r}')
    number, unit = match.groups()
    return int(float(number) * _SIZE_UNITS[unit.upper()])


# Results store - using SQLite by default
DATABASE_URL = os.getenv('DATABASE_URL', 'sqlite:///./roadknn_results.db')

# SILC refuses to build past this many bytes
SILC_MEMORY_BUDGET = parse_size(os.getenv('ROADKNN_SILC_MEMORY_BUDGET', '8G'))

INDEX_DIR = os.getenv('ROADKNN_INDEX_DIR', 'indexes')
RESULTS_DIR = os.getenv('ROADKNN_RESULTS_DIR', 'results')
LOG_LEVEL = os.getenv('ROADKNN_LOG_LEVEL', 'INFO').upper()
WORKERS = int(os.getenv('ROADKNN_WORKERS', '1'))

LOG_FORMAT = '%(levelname)-5.5s [%(name)s] %(message)s'
