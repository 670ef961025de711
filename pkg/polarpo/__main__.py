"""Allow ``python -m polarpo``."""

import sys

from polarpo.cli import main

if __name__ == "__main__":
    sys.exit(main())
