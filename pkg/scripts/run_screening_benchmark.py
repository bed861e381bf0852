#!/usr/bin/env python3
"""Full-scale vertex-screening benchmark on the two-class planted-block
generator: 100 seeded repeats, AUC per screening method, report CSVs.

Equivalent to:
    vertexscreen replicate exp1 --repeats 100 --seed 1 --out results/exp1
"""

import sys

from vertexscreen.cli import main

if __name__ == "__main__":
    args = [
        "replicate", "exp1",
        "--repeats", "100",
        "--seed", "1",
        "--out", "results/exp1",
    ] + sys.argv[1:]
    sys.exit(main(args))
