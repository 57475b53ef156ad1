from __future__ import annotations

import sys

from sourir.cli import main

sys.exit(main())
