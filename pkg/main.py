#!/usr/bin/env python3
"""
itlbench launcher
=================

Runs the workbench from a source checkout without installing it.

Usage:
    python main.py check model.txt w "X p -> p"
    python main.py paper --only prop2
    python main.py --help
"""

import sys
from pathlib import Path

# Add src to path for imports
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))


def run():
    try:
        from itlbench.cli import main
    except ImportError as e:
        print(f"Failed to import itlbench: {e}", file=sys.stderr)
        print("Make sure the dependencies are installed: pip install -r requirements.txt", file=sys.stderr)
        return 1
    return main()


if __name__ == "__main__":
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        sys.exit(130)
