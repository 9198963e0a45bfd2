"""Print carrier sizes of small free algebras and the time taken to build each."""

import argparse
import time

from svrunify.algebra import free_algebra
from svrunify.budget import Budget, ResourceExceeded


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-gens", type=int, default=2)
    ap.add_argument("--budget", type=int, default=4000)
    args = ap.parse_args()
    budget = Budget(max_algebra_size=args.budget)
    for sig in ("isl", "lc", "nis"):
        for n in range(args.max_gens + 1):
            gens = "pqrs"[:n]
            start = time.perf_counter()
            try:
                size = str(free_algebra(sig, tuple(gens), budget).size)
            except ResourceExceeded:
                size = f"> {args.budget}"
            print(f"{sig:4} {n}  {size:>8}  {time.perf_counter() - start:6.2f} s")


if __name__ == "__main__":
    main()
