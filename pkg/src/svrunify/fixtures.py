"""Golden values: recompute, store as versioned JSON, diff.

N1 is the size of the free ISL algebra on one generator, N3 the number of its
endomorphisms.  N2, the size of the ISL algebra presented by
((x->z)/\\(y->z))->z = T over {x,y,z}, exceeds every practical carrier budget;
it is stored as a lower bound.  The quick check re-confirms the small bound,
``full=True`` re-confirms the large one (a few minutes).
"""

from __future__ import annotations

import json
from pathlib import Path

from svrunify.algebra import Presentation, enumerate_homomorphisms, free_algebra, presented_algebra
from svrunify.budget import Budget, ResourceExceeded
from svrunify.syntax import ISL, LC, NIS, parse_term, top

FIXTURES_VERSION = 1
DEFAULT_PATH = Path(__file__).parent / "data" / "fixtures.json"

ISL_EXAMPLE = "((x -> z) /\\ (y -> z)) -> z"
N2_QUICK_BUDGET = 300
N2_FULL_BUDGET = 4000

FREE_SIZES = [("isl", 0), ("isl", 1), ("isl", 2), ("lc", 0), ("lc", 1), ("lc", 2), ("nis", 0), ("nis", 1)]


def _n2_exceeds(limit: int) -> bool:
    pres = Presentation(ISL, ("x", "y", "z"), ((parse_term(ISL_EXAMPLE, ISL), top()),))
    try:
        presented_algebra(pres, Budget(max_algebra_size=limit))
    except ResourceExceeded:
        return True
    return False


def compute_fixtures(full: bool = False) -> dict:
    from svrunify.interpolation import forall_factorize
    from svrunify.unification import UnificationProblem, svr_unify, unify

    f1 = free_algebra(ISL, ("p",))
    n3 = len(enumerate_homomorphisms(f1, f1))
    n2_budget = N2_FULL_BUDGET if full else N2_QUICK_BUDGET
    n2 = {"exceeds": N2_FULL_BUDGET, "checked_budget": n2_budget, "confirmed": _n2_exceeds(n2_budget)}

    sizes = {f"{v}/{n}": free_algebra(v, "pqr"[:n]).size for v, n in FREE_SIZES}

    delta = parse_term(ISL_EXAMPLE, ISL)
    fz = forall_factorize([delta], ("z",), ISL)
    problem = UnificationProblem(ISL, ("x", "y", "z"), ((delta, top()),), ("z",))
    bases = {
        "isl-svr-example": [s.to_json() for s in svr_unify(problem).unifiers],
        "lc-prelinear-pair": [
            s.to_json()
            for s in unify(UnificationProblem(LC, ("p", "q"), ((parse_term("(p -> q) /\\ (q -> p)", LC), top()),))).unifiers
        ],
        "nis-nucleus-fixpoint": [
            s.to_json() for s in unify(UnificationProblem(NIS, ("p",), ((parse_term("l p -> p", NIS), top()),))).unifiers
        ],
    }
    return {
        "version": FIXTURES_VERSION,
        "N1": f1.size,
        "N2": n2,
        "N3": n3,
        "free_sizes": sizes,
        "isl_factorization": [[str(t) for t in f.formulas] for f in fz.factors],
        "bases": bases,
    }


def load_fixtures(path: str | Path | None = None) -> dict:
    return json.loads(Path(path or DEFAULT_PATH).read_text())


def write_fixtures(data: dict, path: str | Path | None = None) -> Path:
    p = Path(path or DEFAULT_PATH)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return p


def diff_fixtures(stored: dict, current: dict, prefix: str = "") -> list[str]:
    """Paths where the two differ; the N2 check budget is not compared."""
    out = []
    for k in sorted(set(stored) | set(current)):
        key = f"{prefix}{k}"
        if key == "N2.checked_budget":
            continue
        a, b = stored.get(k), current.get(k)
        if isinstance(a, dict) and isinstance(b, dict):
            out += diff_fixtures(a, b, key + ".")
        elif a != b:
            out.append(f"{key}: stored {a!r}, computed {b!r}")
    return out
