"""Exact computations for free Boolean topological groups.

Words in a free Boolean group are finite sets of atoms under symmetric
difference.  The submodules cover Graev seminorms (:mod:`freebool.graev`),
eventually periodic subsets of omega and filters (:mod:`freebool.omega`),
Mathias/Laver neighborhoods (:mod:`freebool.mathias`) and basis
constructions over GF(2) (:mod:`freebool.flags`).
"""

from freebool.errors import (
    FreeboolError,
    SearchExhausted,
    Undecided,
    ValidationError,
    VerificationFailure,
)
from freebool.words import Word, sym_diff, word_length, parity

__version__ = "0.1.0"

__all__ = [
    "FreeboolError",
    "SearchExhausted",
    "Undecided",
    "ValidationError",
    "VerificationFailure",
    "Word",
    "sym_diff",
    "word_length",
    "parity",
]
