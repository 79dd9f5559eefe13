"""
DiscountTS - Main Entry Point

    python main.py curve    --config config/examples/toy.json --out out
    python main.py simulate --config config/examples/grid_constant.json --out out
    python main.py validate --config config/examples/simplex_reference.json --out out
    python main.py spde     --config config/examples/grid_stationary.json --out out --t 0 1 5

Threads: set DISCOUNT_TS_THREADS to cap the worker pool.
"""

import sys

from src.cli.app import main

if __name__ == "__main__":
    sys.exit(main())
