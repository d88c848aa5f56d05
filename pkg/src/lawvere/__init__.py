"""Lawvere theories on finite sets.

Theories are presented by operation symbols and equations. The package
enumerates their finite models and homomorphisms, builds free algebras when
they are finite, and recovers the theory's operations as the families of maps
that commute with every homomorphism.
"""

from importlib.resources import files

from .algebra import (FiniteAlgebra, Violation, canonicalize, check_model, enumerate_models,
                      evaluate, is_isomorphic, naive_models, permute, theory_hash)
from .clone import (BOUND_EXCEEDED, EQUAL, EXTRA_NATURAL, Counterexample, ReconstructionReport,
                    induced_family, natural_families, reconstruct_theory, restrict_along,
                    term_clone, validate_theory_morphism)
from .dsl import (ParseError, SourceSpan, format_term, load_morphism, load_theory,
                  parse_candidates, parse_morphism_document, parse_term, parse_theory,
                  render_theory)
from .errors import BoundExceeded, InvalidMorphismError, LawvereError
from .free import FreeAlgebra, FreeBoundExceeded, free_algebra
from .homs import (FailedSquare, Homomorphism, NaturalFamily, NaturalityFailure, all_homs,
                   automorphism_group, check_naturality, enumerate_homs, failed_square,
                   is_homomorphism)
from .sieve import (Distinguished, EquivalentUpTo, Refuted, ValidUpTo, check_validity,
                    models_up_to, sieve_candidates, syntactic_equivalence)
from .terms import (App, Equation, LawvereMorphism, OperationSymbol, Term, Theory,
                    TheoryMorphism, Var, compose, substitute, translate)

__version__ = "0.1.0"


def data_path(name: str):
    """Path of a bundled example file such as ``"monoid.thy"``."""
    return files(__name__) / "data" / name


def builtin_theory(name: str) -> Theory:
    """One of the bundled theories: monoid, group, semilattice, pointed_set, set, ring."""
    return load_theory(data_path(f"{name}.thy"))
