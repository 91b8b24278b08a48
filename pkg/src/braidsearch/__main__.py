"""python -m braidsearch"""

import sys

from .cli import main

sys.exit(main())
