"""
Sifting candidate laws
======================

Keep the candidate equations that hold in every monoid of size at most k
and print a smallest counterexample for the rest.
"""

from lawvere import builtin_theory, data_path, format_term, parse_candidates, sieve_candidates
from lawvere import load_morphism, validate_theory_morphism

monoid = builtin_theory("monoid")
cands = parse_candidates(data_path("monoid_candidates.eqs").read_text(), monoid)

report = sieve_candidates(monoid, cands, 3)
print("valid up to 3:", [eq.name for eq in report.surviving])
for eq, r in report.refuted:
    print(f"{eq.name}: refuted in a monoid of size {r.model.size} with mul table "
          f"{r.model.table('mul')} at {r.env}: {r.lhs_value} != {r.rhs_value}")

# theory morphisms are checked the same way
for name in ("monoid_to_group.thm", "monoid_opposite.thm"):
    F = load_morphism(data_path(name))
    print(F.name, "valid up to 3" if validate_theory_morphism(F, 3) is None else "invalid",
          {s: format_term(t, "xy") for s, t in F.assignment.items()})
