import sys

from bornchain.cli import main

sys.exit(main())
