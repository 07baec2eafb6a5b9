import sys

from gromolab.cli import main

sys.exit(main())
