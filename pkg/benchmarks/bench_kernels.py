"""Compare the compiled kernels with their pure-Python twins.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""

import argparse

from pdsp.bench import format_rows, run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(format_rows(run(args.repeat, args.seed)))


if __name__ == "__main__":
    main()
