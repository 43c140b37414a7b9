#!/usr/bin/env python3
"""
obake - entry point when run from a source checkout.
"""
import os
import sys

# Add the repository root to sys.path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from obake.main import main

if __name__ == "__main__":
    sys.exit(main())
