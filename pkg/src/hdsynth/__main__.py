import sys

from hdsynth.cli import main

sys.exit(main())
