import sys

from dispersim.cli import main

sys.exit(main())
