"""``python -m stochdl``."""

import sys

from .cli import main

sys.exit(main())
