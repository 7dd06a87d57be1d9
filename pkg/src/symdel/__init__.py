"""Symbolic model checking for epistemic logics with BDDs and mental programs."""
from .bdd import Atom, Bdd, BDDError, Manager
from .logic import Formula, LogicError, Vocabulary

__all__ = ['Atom', 'Bdd', 'BDDError', 'Formula', 'LogicError', 'Manager', 'Vocabulary']
