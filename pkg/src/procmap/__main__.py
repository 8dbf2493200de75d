"""Allow `python -m procmap` as an alias for the procmap CLI."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
