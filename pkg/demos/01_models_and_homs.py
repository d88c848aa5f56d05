"""
Finite models and their homomorphisms
=====================================

Enumerate small monoids and groups, relabel them into canonical form and
count the maps between them that respect the operations.
"""

import itertools

from lawvere import (FiniteAlgebra, automorphism_group, builtin_theory, canonicalize,
                     enumerate_homs, enumerate_models)

monoid = builtin_theory("monoid")
group = builtin_theory("group")

# monoids of each size, labeled and up to isomorphism
for s in (1, 2, 3):
    labeled = list(enumerate_models(monoid, s, exact_size=True))
    iso = list(enumerate_models(monoid, s, exact_size=True, up_to_iso=True))
    print(f"size {s}: {len(labeled)} labeled monoids, {len(iso)} up to isomorphism")

# the two groups of order four
for G in enumerate_models(group, 4, exact_size=True, up_to_iso=True):
    print("mul table:", G.table("mul"), " automorphisms:", len(automorphism_group(G)))

# Z2 written with 1 as identity relabels to the usual table
flipped = FiniteAlgebra.from_functions(monoid, 2, mul=lambda a, b: 1 - (a ^ b), e=1)
print("canonical form:", canonicalize(flipped).tables)

# homomorphisms between every pair of 2-element monoids
two = list(enumerate_models(monoid, 2, exact_size=True, up_to_iso=True))
for A, B in itertools.product(two, repeat=2):
    maps = [f.map for f in enumerate_homs(A, B)]
    print(A.table("mul"), "->", B.table("mul"), maps)
