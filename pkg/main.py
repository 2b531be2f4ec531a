#!/usr/bin/env python3
"""
Penstock MPC - command-line entry point when running from a source checkout.

    python main.py compare --controllers base,mpc,lpf --freq synthetic --seed 7
"""

import sys
from pathlib import Path

# Add the current directory to the Python path
sys.path.insert(0, str(Path(__file__).parent))

from penstock_mpc.cli import cli_main  # noqa: E402

if __name__ == '__main__':
    sys.exit(cli_main())
