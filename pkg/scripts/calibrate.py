"""Re-derive the default unit-cell parameters and optionally write them as a config file.

Usage: python3 scripts/calibrate.py [--write src/varactor_ris/data/default_cell.json]
"""

import sys

from varactor_ris.cli import main

if __name__ == "__main__":
    sys.exit(main(["calibrate", *sys.argv[1:]]))
