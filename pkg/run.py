#!/usr/bin/env python3
"""
Main entry point for the address clustering toolkit.

Typical session:
  1. Generate or obtain a stream:
     python run.py synth --num-transactions 100000 --p-reuse 0.2 --out data
  2. Run the full pipeline:
     python run.py run --input data/synthetic.jsonl --out artifacts --snapshot artifacts/engine.acsn
  3. Continue later from the snapshot with more transactions:
     python run.py resume --snapshot artifacts/engine.acsn --input data/next.jsonl --out artifacts

See docs/FORMATS.md for stream layouts, artifact headers and exit codes.
"""

import sys

from app.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
