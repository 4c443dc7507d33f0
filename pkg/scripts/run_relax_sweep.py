"""Run the relax_sweep configuration and write its outputs under runs/relax_sweep/.

Extra arguments are passed through to the CLI (e.g. --format csv,json,svg).
"""

import sys
from pathlib import Path

from relaxcns.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    args = ["relax-sweep", "--config", str(ROOT / "configs" / "relax_sweep.toml"), "--out", str(ROOT / "runs" / "relax_sweep")]
    sys.exit(main(args + sys.argv[1:]))
