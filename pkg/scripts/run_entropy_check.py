"""Run the entropy_check configuration and write its outputs under runs/entropy_check/.

Extra arguments are passed through to the CLI (e.g. --format csv,json,svg).
"""

import sys
from pathlib import Path

from relaxcns.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    args = ["entropy-check", "--config", str(ROOT / "configs" / "entropy_check.toml"), "--out", str(ROOT / "runs" / "entropy_check")]
    sys.exit(main(args + sys.argv[1:]))
