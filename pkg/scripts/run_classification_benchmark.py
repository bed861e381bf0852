#!/usr/bin/env python3
"""Full-scale classification benchmark on the three-class planted-block
generator: losses of the Bayes rule, full-graph plug-in, true-signal
plug-in, and screened plug-ins across a grid of training sizes, plus the
screening false positive rate at the planted size.

Equivalent to:
    vertexscreen replicate exp2 --repeats 20 --m-grid 60,150,300,600 \
        --test-draws 2000 --seed 1 --out results/exp2
"""

import sys

from vertexscreen.cli import main

if __name__ == "__main__":
    args = [
        "replicate", "exp2",
        "--repeats", "20",
        "--m-grid", "60,150,300,600",
        "--test-draws", "2000",
        "--seed", "1",
        "--out", "results/exp2",
    ] + sys.argv[1:]
    sys.exit(main(args))
