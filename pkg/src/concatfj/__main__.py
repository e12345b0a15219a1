import sys

from concatfj.cli import main

sys.exit(main())
