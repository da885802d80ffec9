"""Allow running the CLI as ``python -m prabtel``."""

import sys

from .cli import main

sys.exit(main())
