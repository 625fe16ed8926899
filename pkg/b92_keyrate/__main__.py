"""Run the command-line front end with `python -m b92_keyrate`."""

import sys

from .cli import main

sys.exit(main())
