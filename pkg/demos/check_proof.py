"""Check a proof script and print the kernel report.

Usage: python demos/check_proof.py [PATH]; defaults to the skip equivalence
script shipped with the tests.
"""

import sys
from pathlib import Path

from stochdl.cli import main

default = Path(__file__).resolve().parent.parent / "tests" / "proofs" / "skip_equivalence.sdlp"
path = sys.argv[1] if len(sys.argv) > 1 else str(default)
sys.exit(main(["check", path]))
