"""Certify the density rule of Goedel logic through its supplied factor."""

import argparse
import time

from svrunify.admissibility import certify_tt_converse, check_admissible, tt_rule
from svrunify.interpolation import verify_factor
from svrunify.syntax import LC, parse_term


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-worlds", type=int, default=4)
    args = ap.parse_args()
    rule = tt_rule()
    factor = parse_term("g -> ((p -> q) \\/ c)", LC)
    print("rule:", rule)
    print("factor entails premise:", verify_factor([factor], rule.premises, rule.bound, LC))
    start = time.perf_counter()
    cert = certify_tt_converse(args.max_worlds)
    print(
        f"converse by expansion: ok={cert.ok} over {cert.models} models, "
        f"{cert.refuting} refuting worlds ({time.perf_counter() - start:.1f} s)"
    )
    v = check_admissible(rule, factorization=[[factor]])
    print(f"verdict: {v.verdict} [{v.path}]")
    unaided = check_admissible(rule)
    print(f"without the factor: {unaided.verdict}")


if __name__ == "__main__":
    main()
