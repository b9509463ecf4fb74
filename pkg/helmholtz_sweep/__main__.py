"""Entry point for ``python -m helmholtz_sweep``."""
import sys

from .cli import main

sys.exit(main())
