# pyright: strict

import sys

from spikefraud.cli import main

if __name__ == "__main__":
    sys.exit(main())
