import sys

from freebool.cli import main

sys.exit(main())
