"""Knowledge and belief structures, transformers and their semantics.

Two evaluators live here:

* `boolean_translate` / `eval_bdd_algo` compile a formula into a BDD
  relative to a structure and then evaluate it at a state.  This is fast
  in practice but may allocate BDDs exponential in the formula.
* `naive_check` follows the recursive satisfaction clauses literally on
  an explicit copy of the state set.  It is the ground truth used by the
  tests and is guarded to small vocabularies.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping

from .bdd import Atom, Bdd, Manager
from .logic import (
    And, Announce, Apply, Bot, Event, Formula, K, LogicError, Not, State, Top,
    Var, Vocabulary, bool_eval, compile_bool, formula_length, states_over,
    substitute_atoms,
)

NAIVE_MAX_ATOMS = 12


class StructureError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class KnowledgeStructure:
    vocab: Vocabulary
    law: Bdd
    obs: Mapping[str, frozenset]
    _tr: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for i, o in self.obs.items():
            stray = set(o) - set(self.vocab)
            if stray:
                raise StructureError(f'observables of {i} outside the vocabulary')
        _check_support(self.vocab, self.law, 'state law', primes=False)

    @property
    def mgr(self) -> Manager:
        return self.law.mgr

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(self.obs)

    def with_law(self, law: Bdd) -> KnowledgeStructure:
        return _derived(KnowledgeStructure, vocab=self.vocab, law=law, obs=self.obs, _tr={})


@dataclass(frozen=True, eq=False)
class BeliefStructure:
    vocab: Vocabulary
    law: Bdd
    omega: Mapping[str, Bdd]
    _tr: dict = field(default_factory=dict, repr=False)
    _products: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        _check_support(self.vocab, self.law, 'state law', primes=False)
        for i, w in self.omega.items():
            if w.mgr is not self.law.mgr:
                raise StructureError(f'observation law of {i} uses another manager')
            _check_support(self.vocab, w, f'observation law of {i}', primes=True)

    @property
    def mgr(self) -> Manager:
        return self.law.mgr

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(self.omega)

    def with_law(self, law: Bdd) -> BeliefStructure:
        return _derived(BeliefStructure, vocab=self.vocab, law=law, omega=self.omega,
                        _tr={}, _products={})


Structure = KnowledgeStructure | BeliefStructure


def _derived(cls, **fields):
    """Build without validation.

    Laws derived by announcing a formula inside an event law may mention
    that transformer's event atoms as parameters; they are fixed to the
    event point before any state is evaluated.
    """
    obj = object.__new__(cls)
    for k, v in fields.items():
        object.__setattr__(obj, k, v)
    return obj


def _check_support(vocab, b: Bdd, what: str, primes: bool) -> None:
    for a in b.mgr.support(b):
        if a.at(0) not in vocab or a.prime > (1 if primes else 0):
            raise StructureError(f'{what} mentions {vocab.name(a)}, which is not allowed')


@dataclass(eq=False)
class Transformer:
    """Symbolic event model: event atoms, event law, factual change, event observation.

    `omega_plus` may mention state and event atoms at prime levels 0 and 1.
    """
    name: str
    vocab: Vocabulary           # the name table that registers `vplus`
    vplus: tuple[Atom, ...]
    event_law: Formula
    modified: tuple[Atom, ...]
    change_law: Mapping[Atom, Formula]
    omega_plus: Mapping[str, Bdd]

    def __post_init__(self):
        if set(self.vplus) & set(self.vocab):
            raise StructureError(f'{self.name}: event atoms collide with the vocabulary')
        if set(self.change_law) != set(self.modified):
            raise StructureError(f'{self.name}: change law must cover exactly the modified atoms')
        for q in self.modified:
            if q not in self.vocab or q.frozen:
                raise StructureError(f'{self.name}: modified atom {q} is not in the vocabulary')
        allowed = set(self.vocab) | set(self.vplus)
        for a in _bool_atoms(self.event_law):
            if a not in allowed:
                raise StructureError(f'{self.name}: event law mentions {self.vocab.name(a)}')
        for i, w in self.omega_plus.items():
            for a in w.mgr.support(w):
                if a.at(0) not in allowed or a.prime > 1:
                    raise StructureError(f'{self.name}: event observation law of {i} '
                                         f'mentions {self.vocab.name(a)}')
        for q, f in self.change_law.items():
            for a in _bool_atoms(f):
                if a not in allowed:
                    raise StructureError(f'{self.name}: change law of {self.vocab.name(q)} '
                                         f'mentions {self.vocab.name(a)}')

    def __repr__(self):
        return f'Transformer({self.name})'

    def size(self) -> int:
        """Event atoms + event law + modified atoms + change laws + event observation nodes."""
        return (len(self.vplus) + formula_length(self.event_law) + len(self.modified)
                + sum(formula_length(f) for f in self.change_law.values())
                + sum(w.mgr.node_count(w) for w in self.omega_plus.values()))

    def omega_for(self, agent: str, mgr: Manager) -> Bdd:
        w = self.omega_plus.get(agent)
        if w is None:
            w = mgr.conj(mgr.var(e).iff(mgr.var(e.at(1))) for e in self.vplus)
        return w

    def points(self) -> Iterator[frozenset]:
        return states_over(self.vplus)


def _bool_atoms(f: Formula) -> set[Atom]:
    from .logic import atoms_of
    return atoms_of(f)


transformer_size = Transformer.size


def make_transformer(vocab: Vocabulary, name: str, mgr: Manager, *,
                     vplus: Iterable[str] = (), event_law=None,
                     change: Mapping[str, Formula] | None = None,
                     omega_plus: Mapping[str, Bdd] | None = None,
                     ) -> tuple[Vocabulary, Transformer]:
    """Allocate fresh event atoms in `vocab` and build a transformer over them.

    `event_law` and the values of `change` may be formulas or callables
    receiving the extended vocabulary (convenient when they mention the
    new event atoms).  Returns the extended vocabulary (same V, larger
    name table) together with the transformer.
    """
    vocab2, fresh = vocab.with_events(vplus)
    vocab2.declare(mgr, fresh)
    law = event_law(vocab2) if callable(event_law) else (event_law or Top())
    ch = {}
    for k, f in (change or {}).items():
        ch[vocab2.atom(k)] = f(vocab2) if callable(f) else f
    omegas = {}
    for i, w in (omega_plus or {}).items():
        omegas[i] = w(vocab2) if callable(w) else w
    return vocab2, Transformer(name, vocab2, fresh, law, tuple(ch), ch, omegas)


def merge_tables(a: Vocabulary, b: Vocabulary):
    """Larger of two name tables of the same lineage."""
    (na, pa), (nb, pb) = a.table, b.table
    short, long_ = ((na, pa), (nb, pb)) if len(na) <= len(nb) else ((nb, pb), (na, pa))
    if long_[0][:len(short[0])] != short[0]:
        raise StructureError('transformer and structure come from unrelated vocabularies')
    return long_


# -- basic operations ---------------------------------------------------

def states_of(F: Structure) -> Iterator[State]:
    return F.mgr.all_sat(F.law, F.vocab.atoms)


def is_state(F: Structure, s: State) -> bool:
    return set(s) <= set(F.vocab) and F.mgr.evaluate(F.law, s)


def subst_point(event_law: Formula, vplus: Iterable[Atom], x: Iterable[Atom]) -> Formula:
    x = set(x)
    return substitute_atoms(event_law, {e: e in x for e in vplus})


def frozen_copies(vocab: Vocabulary, modified: Iterable[Atom]) -> dict[Atom, Atom]:
    g = vocab.next_generation()
    return {q: Atom(q.base, 0, g) for q in modified}


def update_state(F: Structure | Vocabulary, s: State, ev: Event) -> State:
    """The actual state after an event: unchanged atoms, frozen old values, x, new values."""
    vocab = F if isinstance(F, Vocabulary) else F.vocab
    X, x = ev.transformer, frozenset(ev.point)
    mod = set(X.modified)
    fz = frozen_copies(vocab, X.modified)
    sx = s | x
    return frozenset(
        {a for a in s if a not in mod}
        | {fz[q] for q in s if q in mod}
        | x
        | {q for q in X.modified if bool_eval(X.change_law[q], sx)})


def embed_s5(F: KnowledgeStructure) -> BeliefStructure:
    mgr = F.mgr
    omega = {i: mgr.conj(mgr.var(p).iff(mgr.var(p.at(1)))
                         for p in F.vocab if p in o)
             for i, o in F.obs.items()}
    return BeliefStructure(F.vocab, F.law, omega)


def as_belief(F: Structure) -> BeliefStructure:
    return embed_s5(F) if isinstance(F, KnowledgeStructure) else F


def announce(F: Structure, psi: Formula) -> Structure:
    return F.with_law(F.law & boolean_translate(F, psi))


def product_update(F: BeliefStructure, X: Transformer) -> BeliefStructure:
    cached = F._products.get(X)
    if cached is not None:
        return cached
    mgr = F.mgr
    names, provs = merge_tables(F.vocab, X.vocab)
    if set(X.vplus) & set(F.vocab):
        raise StructureError(f'{X.name}: event atoms already belong to the structure')
    for q in X.modified:
        if q not in F.vocab:
            raise StructureError(f'{X.name}: modified atom {q} is not in the structure')
    fz = frozen_copies(F.vocab, X.modified)
    vocab = Vocabulary(_table=(names, provs),
                       _atoms=F.vocab.atoms + X.vplus + tuple(fz.values()))
    vocab.declare(mgr, X.vplus + tuple(fz.values()))
    to_frozen = {q: fz[q] for q in X.modified}
    to_frozen_primed = {**to_frozen, **{q.at(1): fz[q].at(1) for q in X.modified}}

    pre = boolean_translate(F, X.event_law)
    law = mgr.relabel(F.law & pre, to_frozen)
    for q in X.modified:
        new_val = mgr.relabel(compile_bool(X.change_law[q], mgr), to_frozen)
        law = law & mgr.var(q).iff(new_val)
    omega = {i: mgr.relabel(w, to_frozen_primed) & X.omega_for(i, mgr)
             for i, w in F.omega.items()}
    G = BeliefStructure(vocab, law, omega)
    F._products[X] = G
    return G


# -- Boolean translation -------------------------------------------------

def boolean_translate(F: Structure, phi: Formula) -> Bdd:
    """Local Boolean equivalent of `phi` on `F`: s satisfies it iff F, s |= phi."""
    r = F._tr.get(phi)
    if r is not None:
        return r
    mgr = F.mgr
    match phi:
        case Top():
            r = mgr.true
        case Bot():
            r = mgr.false
        case Var(a):
            r = mgr.var(a)
        case Not(a):
            r = ~boolean_translate(F, a)
        case And(a, b):
            r = boolean_translate(F, a) & boolean_translate(F, b)
        case K(i, a) if isinstance(F, KnowledgeStructure):
            hidden = [p for p in F.vocab if p not in _obs(F, i)]
            r = mgr.forall(hidden, F.law.implies(boolean_translate(F, a)))
        case K(i, a):
            pm = {p: p.at(1) for p in F.vocab}
            body = mgr.relabel(F.law, pm).implies(
                _omega(F, i).implies(mgr.relabel(boolean_translate(F, a), pm)))
            r = mgr.forall(pm.values(), body)
        case Announce(psi, xi):
            pre = boolean_translate(F, psi)
            r = pre.implies(boolean_translate(F.with_law(F.law & pre), xi))
        case Apply(ev, xi):
            if isinstance(F, KnowledgeStructure):
                r = boolean_translate(embed_s5(F), phi)
            else:
                r = _translate_event(F, ev, xi)
        case _:
            raise LogicError(f'cannot translate {phi!r}')
    F._tr[phi] = r
    return r


def _translate_event(F: BeliefStructure, ev: Event, xi: Formula) -> Bdd:
    mgr = F.mgr
    X, x = ev.transformer, frozenset(ev.point)
    pre = boolean_translate(F, subst_point(X.event_law, X.vplus, x))
    G = product_update(F, X)
    body = boolean_translate(G, xi)
    body = mgr.substitute(body, {q: compile_bool(X.change_law[q], mgr) for q in X.modified})
    body = mgr.restrict_many(body, {e: e in x for e in X.vplus})
    fz = frozen_copies(F.vocab, X.modified)
    body = mgr.substitute(body, {fz[q]: mgr.var(q) for q in X.modified})
    return pre.implies(body)


def _obs(F: KnowledgeStructure, i: str) -> frozenset:
    try:
        return F.obs[i]
    except KeyError:
        raise StructureError(f'unknown agent {i!r}') from None


def _omega(F: BeliefStructure, i: str) -> Bdd:
    try:
        return F.omega[i]
    except KeyError:
        raise StructureError(f'unknown agent {i!r}') from None


def eval_bdd_algo(F: Structure, s: State, phi: Formula, stats=None) -> bool:
    """Translate then evaluate; records nodes allocated in `stats.peak_nodes`."""
    if not is_state(F, s):
        raise StructureError('the given set is not a state of the structure')
    before = len(F.mgr)
    value = F.mgr.evaluate(boolean_translate(F, phi), s)
    if stats is not None:
        stats.peak_nodes = max(stats.peak_nodes, len(F.mgr) - before)
    return value


# -- naive semantics on explicit state sets ------------------------------

@dataclass(frozen=True, eq=False)
class _Explicit:
    vocab: Vocabulary
    mgr: Manager
    states: frozenset
    obs: Mapping[str, frozenset] | None
    omega: Mapping[str, Bdd] | None

    def related(self, i: str, s: State, t: State) -> bool:
        if self.obs is not None:
            o = self.obs.get(i)
            if o is None:
                raise StructureError(f'unknown agent {i!r}')
            return s & o == t & o
        w = self.omega.get(i)
        if w is None:
            raise StructureError(f'unknown agent {i!r}')
        return self.mgr.evaluate(w, s | {a.at(1) for a in t})


def _explicit(F: Structure) -> _Explicit:
    if len(F.vocab) > NAIVE_MAX_ATOMS:
        raise StructureError(
            f'naive semantics refused: {len(F.vocab)} atoms exceeds the guard of {NAIVE_MAX_ATOMS}')
    states = frozenset(states_of(F))
    if isinstance(F, KnowledgeStructure):
        return _Explicit(F.vocab, F.mgr, states, F.obs, None)
    return _Explicit(F.vocab, F.mgr, states, None, F.omega)


def naive_check(F: Structure, s: State, phi: Formula) -> bool:
    """Literal recursive satisfaction on explicitly materialized updates."""
    if not is_state(F, s):
        raise StructureError('the given set is not a state of the structure')
    return _naive(_explicit(F), frozenset(s), phi)


def _naive(E: _Explicit, s: State, phi: Formula) -> bool:
    match phi:
        case Top():
            return True
        case Bot():
            return False
        case Var(a):
            return a in s
        case Not(a):
            return not _naive(E, s, a)
        case And(a, b):
            return _naive(E, s, a) and _naive(E, s, b)
        case K(i, a):
            return all(_naive(E, t, a) for t in E.states if E.related(i, s, t))
        case Announce(psi, xi):
            if not _naive(E, s, psi):
                return True
            kept = frozenset(t for t in E.states if _naive(E, t, psi))
            return _naive(replace(E, states=kept), s, xi)
        case Apply(ev, xi):
            X = ev.transformer
            if not _naive(E, s, subst_point(X.event_law, X.vplus, ev.point)):
                return True
            return _naive(_explicit_product(E, X), update_state(E.vocab, s, ev), xi)
    raise LogicError(f'cannot evaluate {phi!r}')


def _explicit_product(E: _Explicit, X: Transformer) -> _Explicit:
    mgr = E.mgr
    if E.obs is not None:
        omega = {i: mgr.conj(mgr.var(p).iff(mgr.var(p.at(1))) for p in E.vocab if p in o)
                 for i, o in E.obs.items()}
        E = replace(E, obs=None, omega=omega)
    names, provs = merge_tables(E.vocab, X.vocab)
    fz = frozen_copies(E.vocab, X.modified)
    vocab = Vocabulary(_table=(names, provs),
                       _atoms=E.vocab.atoms + X.vplus + tuple(fz.values()))
    vocab.declare(mgr, X.vplus + tuple(fz.values()))
    states = set()
    for t in E.states:
        for y in X.points():
            if _naive(E, t, subst_point(X.event_law, X.vplus, y)):
                states.add(update_state(E.vocab, t, Event(X, y)))
    ren = {q: fz[q] for q in X.modified}
    ren.update({q.at(1): fz[q].at(1) for q in X.modified})
    omega = {i: mgr.relabel(w, ren) & X.omega_for(i, mgr) for i, w in E.omega.items()}
    return _Explicit(vocab, mgr, frozenset(states), None, omega)


def structure_stats(F: Structure) -> str:
    lines = [f'vocab={len(F.vocab)} law_nodes={F.mgr.node_count(F.law)}']
    if isinstance(F, KnowledgeStructure):
        for i, o in F.obs.items():
            lines.append(f'agent={i} observables={len(o)}')
    else:
        for i, w in F.omega.items():
            lines.append(f'agent={i} omega_nodes={F.mgr.node_count(w)}')
    return '\n'.join(lines) + '\n'
