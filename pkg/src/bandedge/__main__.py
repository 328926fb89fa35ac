"""Main entry point for ``python -m bandedge``."""

import sys

from bandedge.cli.commands import main

if __name__ == "__main__":
    sys.exit(main())
