import sys

from tlcurv.cli import main

sys.exit(main())
