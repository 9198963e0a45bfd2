import sys

from svrunify.cli import main

sys.exit(main())
