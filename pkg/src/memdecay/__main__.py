import sys

from memdecay.cli import main

sys.exit(main())
