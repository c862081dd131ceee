"""Run a corrspace command: ``python main.py simulate --resource cluster ...``."""

import sys

from corrspace.cli import main

if __name__ == "__main__":
    sys.exit(main())
