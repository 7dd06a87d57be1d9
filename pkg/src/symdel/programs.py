"""Mental programs: assignments, tests, union, composition, intersection.

A program denotes a relation on states (subsets of a vocabulary).  The
evaluators here enumerate successors lazily; `relation_of` materializes
the whole relation and is guarded to small vocabularies.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator

from .bdd import Atom
from .logic import (
    BOT, TOP, And, Bot, Formula, LogicError, Not, State, Top, Var,
    bool_eval, formula_length, is_boolean, states_over,
)

RELATION_MAX_ATOMS = 8


class Program:
    __slots__ = ()

    def __or__(self, other):
        return Union(self, other)

    def __rshift__(self, other):
        """`a >> b` is sequential composition."""
        return Seq(self, other)

    def __and__(self, other):
        return Inter(self, other)


@dataclass(frozen=True, slots=True)
class Assign(Program):
    atom: Atom
    value: bool


@dataclass(frozen=True, slots=True)
class Test(Program):
    cond: Formula

    def __post_init__(self):
        if not is_boolean(self.cond):
            raise LogicError('tests take Boolean formulas only')


@dataclass(frozen=True, slots=True)
class Union(Program):
    left: Program
    right: Program


@dataclass(frozen=True, slots=True)
class Seq(Program):
    left: Program
    right: Program


@dataclass(frozen=True, slots=True)
class Inter(Program):
    left: Program
    right: Program


SKIP = Test(TOP)
ABORT = Test(BOT)


def seq(*items: Program) -> Program:
    """Left-folded composition; the empty composition is ?Top."""
    return reduce(Seq, items) if items else SKIP


def union(*items: Program) -> Program:
    """Left-folded union; the empty union is ?Bot."""
    return reduce(Union, items) if items else ABORT


def mp_length(pi: Program) -> int:
    """Assignments count 1, tests their formula length, binary operators add no extra."""
    memo: dict[int, int] = {}

    def ln(p):
        r = memo.get(id(p))
        if r is None:
            match p:
                case Assign():
                    r = 1
                case Test(c):
                    r = formula_length(c)
                case Union(a, b) | Seq(a, b) | Inter(a, b):
                    r = ln(a) + ln(b)
                case _:
                    raise LogicError(f'not a program: {p!r}')
            memo[id(p)] = r
        return r

    return ln(pi)


def program_atoms(pi: Program) -> set[Atom]:
    from .logic import atoms_of
    out: set[Atom] = set()
    stack = [pi]
    while stack:
        p = stack.pop()
        match p:
            case Assign(a, _):
                out.add(a)
            case Test(c):
                out |= atoms_of(c)
            case Union(a, b) | Seq(a, b) | Inter(a, b):
                stack.extend((a, b))
    return out


# -- relational semantics -------------------------------------------------

def successors(pi: Program, s: State) -> Iterator[State]:
    """Every t with s related to t by `pi`, each once."""
    seen: set[State] = set()
    for t in _succ(pi, frozenset(s)):
        if t not in seen:
            seen.add(t)
            yield t


def _succ(pi: Program, s: State) -> Iterator[State]:
    match pi:
        case Assign(a, True):
            yield s | {a}
        case Assign(a, False):
            yield s - {a}
        case Test(c):
            if bool_eval(c, s):
                yield s
        case Union(a, b):
            yield from _succ(a, s)
            yield from _succ(b, s)
        case Seq(a, b):
            for u in successors(a, s):
                yield from _succ(b, u)
        case Inter(a, b):
            for t in successors(a, s):
                if related(b, s, t):
                    yield t
        case _:
            raise LogicError(f'not a program: {pi!r}')


def related(pi: Program, s: State, t: State) -> bool:
    s, t = frozenset(s), frozenset(t)
    match pi:
        case Assign(a, True):
            return t == s | {a}
        case Assign(a, False):
            return t == s - {a}
        case Test(c):
            return s == t and bool_eval(c, s)
        case Union(a, b):
            return related(a, s, t) or related(b, s, t)
        case Seq(a, b):
            return any(related(b, u, t) for u in successors(a, s))
        case Inter(a, b):
            return related(a, s, t) and related(b, s, t)
    raise LogicError(f'not a program: {pi!r}')


def relation_of(pi: Program, vocab: Iterable[Atom]) -> set[tuple[State, State]]:
    atoms = list(vocab)
    if len(atoms) > RELATION_MAX_ATOMS:
        raise ValueError(f'relation_of refused: {len(atoms)} atoms exceeds the guard of '
                         f'{RELATION_MAX_ATOMS}')
    stray = program_atoms(pi) - set(atoms)
    if stray:
        raise LogicError(f'program mentions atoms outside the vocabulary: {sorted(stray)}')
    return {(s, t) for s in states_over(atoms) for t in successors(pi, s)}


# -- building blocks ------------------------------------------------------

def of(x: Iterable[Atom], y: Iterable[Atom]) -> Formula:
    """The conjunction fixing the atoms of y: those in x true, the rest false."""
    x, y = set(x), list(y)
    if not x <= set(y):
        raise LogicError('of(x, y) requires x to be a subset of y')
    lits = [Var(p) if p in x else Not(Var(p)) for p in y]
    return reduce(And, lits) if lits else TOP


def change(x: Iterable[Atom]) -> Program:
    return seq(*(Union(Assign(p, True), Assign(p, False)) for p in x))


def goto(t: Iterable[Atom], vocab: Iterable[Atom]) -> Program:
    """Set exactly the atoms of t, in vocabulary order: first the true ones, then the false."""
    t, vocab = set(t), list(vocab)
    if not t <= set(vocab):
        raise LogicError('goto(t, V) requires t to be a subset of V')
    return seq(*[Assign(p, True) for p in vocab if p in t],
               *[Assign(p, False) for p in vocab if p not in t])


def _state_key(vocab: list[Atom]):
    idx = {a: i for i, a in enumerate(vocab)}
    return lambda s: sorted(idx[a] for a in s)


def program_of_relation(R: Iterable[tuple[State, State]], vocab: Iterable[Atom]) -> Program:
    """Union over the pairs (x, y) of R of `?of(x, V) ; goto(y, V)`."""
    vocab = list(vocab)
    key = _state_key(vocab)
    pairs = sorted(R, key=lambda st: (key(st[0]), key(st[1])))
    return union(*(Seq(Test(of(x, vocab)), goto(y, vocab)) for x, y in pairs))


# -- simplification -----------------------------------------------------

def _flatten(pi: Program, kind) -> list[Program]:
    out, stack = [], [pi]
    while stack:
        p = stack.pop()
        if isinstance(p, kind):
            stack.append(p.right)
            stack.append(p.left)
        else:
            out.append(p)
    return out


def _is_test(p, value) -> bool:
    return isinstance(p, Test) and isinstance(p.cond, Top if value else Bot)


def _simplify_seq(items: list[Program]) -> list[Program]:
    out: list[Program] = []
    for p in items:
        if _is_test(p, True):
            continue
        if _is_test(p, False):
            return [ABORT]
        prev = out[-1] if out else None
        if (isinstance(prev, Assign) and isinstance(p, Test)
                and isinstance(p.cond, Var) and p.cond.atom == prev.atom):
            if prev.value:
                continue
            return [ABORT]
        out.append(p)
    return out


def simplify(pi: Program) -> Program:
    """Rewrite to a fixpoint with relation-preserving laws.

    p<-T ; ?p = p<-T,  p<-F ; ?p = ?Bot,  ?Top is a unit of `;`,
    ?Bot absorbs `;` on both sides and is a unit of union.
    """
    while True:
        nxt = _simplify_once(pi)
        if nxt == pi:
            return pi
        pi = nxt


def _simplify_once(pi: Program) -> Program:
    match pi:
        case Seq():
            items = _simplify_seq([_simplify_once(p) for p in _flatten(pi, Seq)])
            return seq(*items)
        case Union():
            items = [q for q in (_simplify_once(p) for p in _flatten(pi, Union))
                     if not _is_test(q, False)]
            return union(*items)
        case Inter(a, b):
            a, b = _simplify_once(a), _simplify_once(b)
            if _is_test(a, False) or _is_test(b, False):
                return ABORT
            return Inter(a, b)
    return pi
