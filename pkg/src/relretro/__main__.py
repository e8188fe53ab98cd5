import sys

from relretro.cli import main

sys.exit(main())
