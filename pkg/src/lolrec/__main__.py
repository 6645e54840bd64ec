import sys

from .harness import cli_main

sys.exit(cli_main())
