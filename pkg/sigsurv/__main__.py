import sys

from sigsurv.cli import main

sys.exit(main())
