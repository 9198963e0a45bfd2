"""Admissibility of Pi2-rules and unification with simple variable restrictions.

Three locally finite varieties are supported: implicative semilattices (``isl``),
Goedel algebras (``lc``) and nuclear implicative semilattices (``nis``).
"""

from svrunify.budget import Budget, ResourceExceeded
from svrunify.syntax import (
    ISL,
    LC,
    NIS,
    Pi2Rule,
    Signature,
    Substitution,
    Term,
    parse_term,
    print_term,
    signature,
)

__all__ = [
    "Budget",
    "ISL",
    "LC",
    "NIS",
    "Pi2Rule",
    "ResourceExceeded",
    "Signature",
    "Substitution",
    "Term",
    "parse_term",
    "print_term",
    "signature",
]
