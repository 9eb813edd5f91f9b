import sys

from lolfusion.cli import main

sys.exit(main())
