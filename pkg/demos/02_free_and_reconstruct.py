"""
Operations from homomorphisms
=============================

A family of maps A^n -> A, one per model, that commutes with every
homomorphism is called natural. Every term gives one. For semilattices the
free algebra on n generators is finite, and the natural families over
models of size at most 3 are exactly the term operations. For monoids the
free algebra on one generator is infinite, and truncating the category of
models lets in an extra family.
"""

import numpy as np

from lawvere import (builtin_theory, format_term, free_algebra, models_up_to,
                     natural_families, reconstruct_theory)

semi = builtin_theory("semilattice")
monoid = builtin_theory("monoid")

# the free semilattice on three generators has 2^3 - 1 elements
F = free_algebra(semi, 3)
print(F.size, [format_term(t, "xyz") for t in F.element_terms])

# congruence closure on the free monoid never stabilises
r = free_algebra(monoid, 1)
print("monoid, one generator: class counts", r.trace)

# natural families U^2 => U over semilattices of size <= 3
models = models_up_to(semi, 3)
fams = natural_families(semi, 2, 1, 3, models=models)
# one row per family: its value at every pair in every model
print(np.array([alpha.values() for alpha in fams]).reshape(len(fams), -1))

# the full comparison, cell by cell
for theory, k in ((semi, 3), (monoid, 2)):
    report = reconstruct_theory(theory, 1 if theory is monoid else 2, 1, k, 3)
    for c in report.cells:
        print(theory.name, c.n, c.m, c.clone_size, c.natural_count, c.verdict, c.note)
