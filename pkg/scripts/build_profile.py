"""Run the profile configuration and write its outputs under runs/profile/.

Extra arguments are passed through to the CLI (e.g. --format csv,json,svg).
"""

import sys
from pathlib import Path

from relaxcns.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    args = ["profile", "--config", str(ROOT / "configs" / "profile.toml"), "--out", str(ROOT / "runs" / "profile")]
    sys.exit(main(args + sys.argv[1:]))
