import sys

from dbel.cli import main

sys.exit(main())
