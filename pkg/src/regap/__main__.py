import sys

from regap.cli import main

sys.exit(main())
