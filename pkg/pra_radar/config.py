from dotenv import load_dotenv
import os
from pathlib import Path

# Get the directory where this config.py file is located
current_dir = Path(__file__).parent

# .env next to the package first, then whatever the process environment holds
load_dotenv(current_dir / ".env")

# Logging level for CLI and HTTP service
LOG_LEVEL = os.getenv("PRA_LOG_LEVEL", "INFO").upper()

# Worker pool size for scheme comparisons / SNR sweeps
try:
    MAX_WORKERS = int(os.getenv("PRA_MAX_WORKERS", "4"))
except ValueError:
    print(f"WARNING: PRA_MAX_WORKERS={os.getenv('PRA_MAX_WORKERS')!r} is not an integer, falling back to 4")
    MAX_WORKERS = 4

# Experiment config used when --config is not given
DEFAULT_CONFIG = Path(os.getenv("PRA_DEFAULT_CONFIG", str(current_dir.parent / "configs" / "paper_sec6.json")))

# Where CSV artifacts go when neither --out nor output_dir is set
OUTPUT_DIR = Path(os.getenv("PRA_OUTPUT_DIR", "results"))

API_TITLE = os.getenv("PRA_API_TITLE", "PRA MIMO Radar BCRB API")

if MAX_WORKERS < 1:
    print(f"WARNING: PRA_MAX_WORKERS={MAX_WORKERS} is invalid, falling back to 1")
    MAX_WORKERS = 1

# Small instance for the oracle cross-checks (verify command)
VERIFY_CONFIG = current_dir.parent / "configs" / "verify_small.json"
