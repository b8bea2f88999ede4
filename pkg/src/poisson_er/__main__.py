import sys

from poisson_er.cli import main

sys.exit(main())
