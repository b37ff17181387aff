#!/usr/bin/env python3
"""Run the full curation pipeline once on the bundled toy corpus."""

import sys
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from main import main

if __name__ == "__main__":
    config = project_root / "data" / "default_config.toml"
    sys.exit(main(["pipeline", "--config", str(config)] + sys.argv[1:]))
