"""Vocabularies, states and the formula languages.

Boolean formulas are the fragment of `Formula` built from `Top`, `Bot`,
`Var`, `Not` and `And`.  Disjunction, implication, equivalence and the
dual modality are sugar: the helpers below return their elaborated core
form, so lengths always count core connectives only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping

from .bdd import EVENT, ORIGINAL, Atom, Bdd, Manager

if TYPE_CHECKING:
    from .structures import Transformer

State = frozenset  # frozenset[Atom], prime level 0


class LogicError(Exception):
    pass


class Vocabulary:
    """Ordered atoms of a structure plus the name table they index into.

    The name table holds every base ever allocated in this lineage (the
    original propositions and all event atoms), so fresh allocations can
    never collide.  Instances are immutable; extension returns a copy.
    """

    __slots__ = ('names', 'provs', 'atoms', '_by_name', '_members')

    def __init__(self, names: Iterable[str] = (), *, _table=None, _atoms=None):
        if _table is None:
            names = list(names)
            if len(set(names)) != len(names):
                dup = next(n for n in names if names.count(n) > 1)
                raise LogicError(f'duplicate proposition {dup!r}')
            for n in names:
                _check_name(n)
            self.names = tuple(names)
            self.provs = (ORIGINAL,) * len(names)
            self.atoms = tuple(Atom(i) for i in range(len(names)))
        else:
            self.names, self.provs = _table
            self.atoms = tuple(_atoms)
        self._by_name = {n: Atom(i, 0, p)
                         for i, (n, p) in enumerate(zip(self.names, self.provs))}
        self._members = frozenset(self.atoms)

    @classmethod
    def of(cls, text: str) -> Vocabulary:
        return cls(text.replace(',', ' ').split())

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)

    def __contains__(self, a):
        return a in self._members

    def __repr__(self):
        return f'Vocabulary({" ".join(self.name(a) for a in self.atoms)})'

    def __getitem__(self, name: str) -> Atom:
        return self.atom(name)

    def atom(self, name: str) -> Atom:
        """Resolve a registered name (V or any allocated event atom)."""
        prime = len(name) - len(name.rstrip("'"))
        base = name[:len(name) - prime]
        try:
            return self._by_name[base].at(prime)
        except KeyError:
            raise LogicError(f'undeclared atom {base!r}') from None

    def knows(self, name: str) -> bool:
        return name in self._by_name

    def name(self, a: Atom) -> str:
        if not 0 <= a.base < len(self.names):
            return str(a)
        base = self.names[a.base]
        if a.frozen:
            base += f'°{a.prov}'
        return base + "'" * a.prime

    def state(self, names: Iterable[str] | str) -> State:
        if isinstance(names, str):
            names = names.replace(',', ' ').split()
        s = frozenset(self.atom(n) for n in names)
        stray = s - self._members
        if stray:
            raise LogicError(f'atoms {sorted(self.name(a) for a in stray)} not in vocabulary')
        return s

    def fmt_state(self, s: Iterable[Atom]) -> str:
        order = {a: i for i, a in enumerate(self.atoms)}
        return '{' + ', '.join(self.name(a) for a in sorted(s, key=lambda a: order.get(a, 1 << 20))) + '}'

    @property
    def table(self):
        return self.names, self.provs

    def with_events(self, names: Iterable[str]) -> tuple[Vocabulary, tuple[Atom, ...]]:
        """Register fresh event atoms without adding them to V."""
        names = list(names)
        for n in names:
            _check_name(n)
            if n in self._by_name or names.count(n) > 1:
                raise LogicError(f'event atom {n!r} collides with an existing atom')
        start = len(self.names)
        fresh = tuple(Atom(start + k, 0, EVENT) for k in range(len(names)))
        table = (self.names + tuple(names), self.provs + (EVENT,) * len(names))
        return Vocabulary(_table=table, _atoms=self.atoms), fresh

    def extend(self, atoms: Iterable[Atom]) -> Vocabulary:
        extra = [a for a in atoms if a not in self._members]
        return Vocabulary(_table=self.table, _atoms=self.atoms + tuple(extra))

    def next_generation(self) -> int:
        return 1 + max((a.prov for a in self.atoms if a.frozen), default=0)

    def declare(self, mgr: Manager, atoms: Iterable[Atom] | None = None) -> None:
        """Rank atoms in `mgr` with interleaved primes: p < p' < p''."""
        for a in (self.atoms if atoms is None else atoms):
            mgr.declare(a.at(0), a.at(1), a.at(2))


_RESERVED = {'K', 'Khat', 'Top', 'Bot', 'U', 'cap', 'T', 'F'}


def _check_name(n: str) -> None:
    if not n or not (n[0].isalpha() or n[0] == '_') or not all(
            c.isalnum() or c == '_' for c in n):
        raise LogicError(f'invalid proposition name {n!r}')
    if n in _RESERVED:
        raise LogicError(f'{n!r} is a reserved word')


class AgentSet(tuple):
    def __new__(cls, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise LogicError('duplicate agent names')
        return super().__new__(cls, names)


# -- formula ASTs ------------------------------------------------------

class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Bot(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Var(Formula):
    atom: Atom


@dataclass(frozen=True, slots=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class K(Formula):
    agent: str
    arg: Formula


@dataclass(frozen=True, slots=True)
class Announce(Formula):
    """`[!ann] arg`"""
    ann: Formula
    arg: Formula


@dataclass(frozen=True, slots=True)
class Event:
    transformer: 'Transformer'
    point: frozenset = field(default_factory=frozenset)


@dataclass(frozen=True, slots=True)
class Apply(Formula):
    """`[X, x] arg`"""
    event: Event
    arg: Formula


TOP = Top()
BOT = Bot()


def var(a: Atom) -> Var:
    return Var(a)


def neg(a: Formula) -> Formula:
    return Not(a)


def conj(*items: Formula) -> Formula:
    if not items:
        return TOP
    return reduce(And, items)


def disj(*items: Formula) -> Formula:
    """`a | b` elaborated as `~(~a & ~b)`."""
    if not items:
        return BOT
    return reduce(lambda a, b: Not(And(Not(a), Not(b))), items)


def imp(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def iff(a: Formula, b: Formula) -> Formula:
    return And(imp(a, b), imp(b, a))


def khat(agent: str, a: Formula) -> Formula:
    return Not(K(agent, Not(a)))


def is_boolean(f: Formula) -> bool:
    match f:
        case Top() | Bot() | Var():
            return True
        case Not(a):
            return is_boolean(a)
        case And(a, b):
            return is_boolean(a) and is_boolean(b)
    return False


def atoms_of(f: Formula) -> set[Atom]:
    """Atoms occurring in `f`, not looking inside event payloads."""
    out: set[Atom] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        match g:
            case Var(a):
                out.add(a)
            case Not(a) | K(_, a):
                stack.append(a)
            case And(a, b) | Announce(a, b):
                stack.extend((a, b))
            case Apply(_, a):
                stack.append(a)
    return out


def agents_of(f: Formula) -> set[str]:
    out: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        match g:
            case K(i, a):
                out.add(i)
                stack.append(a)
            case Not(a):
                stack.append(a)
            case And(a, b) | Announce(a, b):
                stack.extend((a, b))
            case Apply(_, a):
                stack.append(a)
    return out


def has_events(f: Formula) -> bool:
    match f:
        case Apply():
            return True
        case Not(a) | K(_, a):
            return has_events(a)
        case And(a, b) | Announce(a, b):
            return has_events(a) or has_events(b)
    return False


def k_depth(f: Formula) -> int:
    match f:
        case K(_, a):
            return 1 + k_depth(a)
        case Not(a) | Apply(_, a):
            return k_depth(a)
        case And(a, b) | Announce(a, b):
            return max(k_depth(a), k_depth(b))
    return 0


# -- semantics of the Boolean fragment ---------------------------------

def bool_eval(f: Formula, s: Iterable[Atom], vocab: Vocabulary | None = None) -> bool:
    """Classical truth of a Boolean formula in the state `s`.

    With `vocab`, atoms outside it (at any prime level) are an error.
    """
    if not isinstance(s, (set, frozenset)):
        s = frozenset(s)
    if vocab is not None:
        for a in atoms_of(f):
            if a.at(0) not in vocab:
                raise LogicError(f'unknown atom {a}')
    return _beval(f, s)


def _beval(f: Formula, s) -> bool:
    match f:
        case Top():
            return True
        case Bot():
            return False
        case Var(a):
            return a in s
        case Not(a):
            return not _beval(a, s)
        case And(a, b):
            return _beval(a, s) and _beval(b, s)
    raise LogicError(f'not a Boolean formula: {type(f).__name__}')


def compile_bool(f: Formula, mgr: Manager) -> Bdd:
    memo: dict[Formula, Bdd] = {}

    def rec(g: Formula) -> Bdd:
        r = memo.get(g)
        if r is not None:
            return r
        match g:
            case Top():
                r = mgr.true
            case Bot():
                r = mgr.false
            case Var(a):
                r = mgr.mk_var(a)
            case Not(a):
                r = mgr.negate(rec(a))
            case And(a, b):
                r = mgr.apply('and', rec(a), rec(b))
            case _:
                raise LogicError(f'not a Boolean formula: {type(g).__name__}')
        memo[g] = r
        return r

    return rec(f)


def bdd_to_formula(b: Bdd) -> Formula:
    """Shannon expansion of a diagram into a Boolean formula (exponential in the worst case)."""
    mgr = b.mgr
    memo: dict[int, Formula] = {}

    def rec(u: Bdd) -> Formula:
        if u.is_true:
            return TOP
        if u.is_false:
            return BOT
        r = memo.get(u.node)
        if r is None:
            a, lo, hi = mgr.succ(u)
            x = Var(a)
            flo, fhi = rec(lo), rec(hi)
            if flo == BOT and fhi == TOP:
                r = x
            elif flo == TOP and fhi == BOT:
                r = Not(x)
            elif flo == BOT:
                r = And(x, fhi)
            elif fhi == BOT:
                r = And(Not(x), flo)
            else:
                r = disj(And(x, fhi), And(Not(x), flo))
            memo[u.node] = r
        return r

    return rec(b)


def prime(f: Formula, atoms: Iterable[Atom] | None = None) -> Formula:
    """Raise the prime level of (the given) atoms by one."""
    keep = None if atoms is None else set(atoms)

    def rec(g):
        match g:
            case Var(a) if keep is None or a in keep:
                return Var(a.at(a.prime + 1))
            case Not(a):
                return Not(rec(a))
            case And(a, b):
                return And(rec(a), rec(b))
        return g

    return rec(f)


# -- lengths -----------------------------------------------------------

def formula_length(f: Formula) -> int:
    match f:
        case Top() | Bot() | Var():
            return 1
        case Not(a) | K(_, a):
            return formula_length(a) + 1
        case And(a, b) | Announce(a, b):
            return formula_length(a) + formula_length(b) + 1
        case Apply(ev, a):
            return ev.transformer.size() + formula_length(a) + 1
    raise LogicError(f'not a formula: {f!r}')


def states_over(atoms: Iterable[Atom]) -> Iterator[State]:
    """All subsets of `atoms`, lexicographic with false first."""
    atoms = list(atoms)
    n = len(atoms)
    for bits in range(1 << n):
        yield frozenset(atoms[i] for i in range(n) if bits >> (n - 1 - i) & 1)


def substitute_atoms(f: Formula, values: Mapping[Atom, bool]) -> Formula:
    """Replace atoms by constants everywhere, including under modalities."""
    def rec(g):
        match g:
            case Var(a) if a in values:
                return TOP if values[a] else BOT
            case Not(a):
                return Not(rec(a))
            case And(a, b):
                return And(rec(a), rec(b))
            case K(i, a):
                return K(i, rec(a))
            case Announce(a, b):
                return Announce(rec(a), rec(b))
            case Apply(ev, a):
                return Apply(ev, rec(a))
        return g

    return rec(f)
