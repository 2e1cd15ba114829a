"""
Project configuration settings
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Project paths
BASE_DIR = Path(__file__).parent.parent
DATA_DIR = BASE_DIR / "data"
CONFIGS_DIR = BASE_DIR / "configs"
RUNS_DIR = Path(os.getenv("ERL_RUNS_DIR", str(DATA_DIR / "runs")))

# Run registry
DATABASE_URL = os.getenv("ERL_DATABASE_URL", "sqlite:///data/experiments.db")

# Logging
LOG_LEVEL = os.getenv("ERL_LOG_LEVEL", "INFO")

# Parallel population evaluation (threads); overrides the config value when set
EVAL_WORKERS = int(os.getenv("ERL_EVAL_WORKERS", 0))

# Recorded in every run manifest
CODE_VERSION = "0.1.0"

# File names inside a run directory
RUN_FILES = {
    "curve": "curve.csv",
    "manifest": "manifest.json",
    "config": "config.json",
    "snapshot": "final_params.npz",
    "selection": "selection_rates.txt",
    "log": "run.log",
}
