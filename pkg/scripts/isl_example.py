"""The restricted ISL problem ((x->z)/\(y->z))->z = T with z fixed: factors, basis, admissibility."""

from svrunify.admissibility import check_admissible
from svrunify.interpolation import audit_factorization, forall_factorize
from svrunify.syntax import ISL, Pi2Rule, parse_term, top, var
from svrunify.unification import UnificationProblem, more_general, svr_unify, unify

delta = parse_term("((x -> z) /\\ (y -> z)) -> z", ISL)

fz = forall_factorize([delta], ("z",), ISL)
report = audit_factorization(fz)
print("factors:", ", ".join(str(f) for f in fz.factors), f"(audit ok={report.ok}, {report.qualifying} qualifying)")

problem = UnificationProblem(ISL, ("x", "y", "z"), ((delta, top()),), ("z",))
basis = svr_unify(problem)
print(f"z-invariant basis [{basis.certificate}]:")
for s in basis.unifiers:
    print("  ", s)
a, b = basis.unifiers
print("comparable:", more_general(a, b, ISL, fixed=("z",)) or more_general(b, a, ISL, fixed=("z",)))

free = unify(problem.unrestricted())
print(f"unrestricted basis [{free.certificate}]:", ", ".join(str(s) for s in free.unifiers))

rule = Pi2Rule(("z",), (delta,), var("x"), ISL)
v = check_admissible(rule)
print(f"{rule}: {v.verdict}, witness {v.witness}")
