#!/usr/bin/env python3
"""
Quasi-proper equilibrium solver - command-line entry point

Usage:
    python scripts/qpe_solve.py --game corpus/matching_pennies.qpef --mode solve-zs
    python scripts/qpe_solve.py --game corpus/myerson_3x3.qpef --mode solve2p --out result.txt
"""

import os
import sys

# Add src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from cli import run


if __name__ == "__main__":
    sys.exit(run())
