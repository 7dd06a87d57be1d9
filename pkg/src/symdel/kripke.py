"""Explicit Kripke models and quantified Boolean formulas.

Both serve as desk-scale ground truth: a structure can be expanded into
its Kripke model and checked with the textbook semantics, and a closed
prenex QBF can be evaluated by brute force or turned into an equivalent
model-checking instance on a knowledge (or belief) structure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .bdd import Manager
from .logic import (
    BOT, And, Announce, Apply, Bot, Formula, K, LogicError, Not, State,
    Top, Var, Vocabulary, conj, disj, formula_length,
)
from .structures import (
    BeliefStructure, KnowledgeStructure, StructureError, states_of,
)

KRIPKE_MAX_ATOMS = 12


@dataclass
class KripkeModel:
    worlds: list[State]
    relations: dict[str, set[tuple[int, int]]]
    vocab: Vocabulary | None = None
    _succ: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n = len(self.worlds)
        for i, rel in self.relations.items():
            for a, b in rel:
                if not (0 <= a < n and 0 <= b < n):
                    raise ValueError(f'relation of {i} has an edge outside the model')
        self._index = {w: k for k, w in enumerate(self.worlds)}

    def index(self, w) -> int:
        if isinstance(w, int):
            return w
        try:
            return self._index[frozenset(w)]
        except KeyError:
            raise StructureError('no such world in the model') from None

    def successors(self, agent: str, w: int) -> list[int]:
        table = self._succ.get(agent)
        if table is None:
            rel = self.relations.get(agent)
            if rel is None:
                raise StructureError(f'unknown agent {agent!r}')
            table = [[] for _ in self.worlds]
            for a, b in sorted(rel):
                table[a].append(b)
            self._succ[agent] = table
        return table[w]

    def edges(self, agent: str) -> set[tuple[State, State]]:
        return {(self.worlds[a], self.worlds[b]) for a, b in self.relations[agent]}


def structure_to_kripke(F, max_atoms: int = KRIPKE_MAX_ATOMS) -> KripkeModel:
    if len(F.vocab) > max_atoms:
        raise StructureError(
            f'expansion refused: {len(F.vocab)} atoms exceeds the guard of {max_atoms}')
    worlds = list(states_of(F))
    rel: dict[str, set[tuple[int, int]]] = {}
    if isinstance(F, KnowledgeStructure):
        for i, o in F.obs.items():
            rel[i] = {(a, b) for a, s in enumerate(worlds) for b, t in enumerate(worlds)
                      if s & o == t & o}
    else:
        for i, w in F.omega.items():
            primed = [frozenset(x.at(1) for x in t) for t in worlds]
            rel[i] = {(a, b) for a, s in enumerate(worlds) for b in range(len(worlds))
                      if F.mgr.evaluate(w, s | primed[b])}
    return KripkeModel(worlds, rel, F.vocab)


def kripke_check(M: KripkeModel, w, phi: Formula) -> bool:
    """Standard semantics; announcements restrict the model to worlds where they hold."""
    alive = frozenset(range(len(M.worlds)))
    return _kc(M, alive, M.index(w), phi, {})


def _kc(M, alive, w, phi, memo) -> bool:
    key = (alive, w, phi)
    r = memo.get(key)
    if r is not None:
        return r
    match phi:
        case Top():
            r = True
        case Bot():
            r = False
        case Var(a):
            r = a in M.worlds[w]
        case Not(a):
            r = not _kc(M, alive, w, a, memo)
        case And(a, b):
            r = _kc(M, alive, w, a, memo) and _kc(M, alive, w, b, memo)
        case K(i, a):
            r = all(_kc(M, alive, v, a, memo) for v in M.successors(i, w) if v in alive)
        case Announce(psi, xi):
            if not _kc(M, alive, w, psi, memo):
                r = True
            else:
                kept = frozenset(v for v in alive if _kc(M, alive, v, psi, memo))
                r = _kc(M, kept, w, xi, memo)
        case Apply():
            raise LogicError('the Kripke oracle does not interpret transformer events')
        case _:
            raise LogicError(f'cannot evaluate {phi!r}')
    memo[key] = r
    return r


# -- QBF --------------------------------------------------------------------

FORALL, EXISTS = 'a', 'e'


@dataclass(frozen=True)
class PrenexQBF:
    """Quantifier blocks over variables 1..n and a CNF matrix of signed literals."""
    nvars: int
    blocks: tuple[tuple[str, tuple[int, ...]], ...]
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for kind, vs in self.blocks:
            if kind not in (FORALL, EXISTS):
                raise ValueError(f'unknown quantifier {kind!r}')
            for v in vs:
                if not 1 <= v <= self.nvars:
                    raise ValueError(f'variable {v} outside 1..{self.nvars}')
                if v in seen:
                    raise ValueError(f'variable {v} quantified twice')
                seen.add(v)
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.nvars:
                    raise ValueError(f'literal {lit} outside 1..{self.nvars}')
        free = sorted({abs(l) for c in self.clauses for l in c} - seen)
        if free:
            raise ValueError(f'free variables {free}; the QBF must be closed')

    @property
    def variables(self) -> list[int]:
        return [v for _, vs in self.blocks for v in vs]

    def vocabulary(self) -> Vocabulary:
        return Vocabulary([f'p{v}' for v in self.variables])

    def matrix(self, vocab: Vocabulary | None = None) -> Formula:
        vocab = vocab or self.vocabulary()

        def lit(l):
            x = Var(vocab[f'p{abs(l)}'])
            return x if l > 0 else Not(x)

        return conj(*(disj(*(lit(l) for l in c)) if c else BOT for c in self.clauses))


def qbf_eval(psi: PrenexQBF) -> bool:
    """Brute force over the quantifier blocks."""
    blocks = [(kind, list(vs)) for kind, vs in psi.blocks if vs]

    def sat(assign: dict) -> bool:
        return all(any(assign[abs(l)] == (l > 0) for l in c) for c in psi.clauses)

    def rec(b: int, assign: dict) -> bool:
        if b == len(blocks):
            return sat(assign)
        kind, vs = blocks[b]
        results = (rec(b + 1, {**assign, **dict(zip(vs, bits))})
                   for bits in _all_bits(len(vs)))
        return all(results) if kind == FORALL else any(results)

    return rec(0, {})


def _all_bits(n: int):
    for k in range(1 << n):
        yield tuple(bool(k >> (n - 1 - i) & 1) for i in range(n))


def qbf_length(psi: PrenexQBF) -> int:
    """Symbol count with core connectives: a block counts as one operator, exists as not-forall-not."""
    prefix = sum(1 if kind == FORALL else 3 for kind, vs in psi.blocks if vs)
    return prefix + formula_length(psi.matrix())


def _agents(psi: PrenexQBF):
    blocks = [(kind, vs) for kind, vs in psi.blocks if vs]
    return [(str(k + 1), kind, vs) for k, (kind, vs) in enumerate(blocks)]


def _reduction_formula(psi: PrenexQBF, vocab: Vocabulary) -> Formula:
    f = psi.matrix(vocab)
    for agent, kind, _ in reversed(_agents(psi)):
        f = K(agent, f) if kind == FORALL else Not(K(agent, Not(f)))
    return f


def qbf_to_instance(psi: PrenexQBF, mgr: Manager | None = None):
    """Knowledge structure, state and formula true iff the QBF is true.

    One agent per quantifier block, observing every atom except the
    block's own; universal blocks become K, existential blocks the dual.
    """
    vocab = psi.vocabulary()
    mgr = mgr or Manager()
    vocab.declare(mgr)
    obs = {}
    for agent, _, vs in _agents(psi):
        own = {vocab[f'p{v}'] for v in vs}
        obs[agent] = frozenset(p for p in vocab if p not in own)
    F = KnowledgeStructure(vocab, mgr.true, obs)
    return F, frozenset(), _reduction_formula(psi, vocab)


def qbf_to_belief_instance(psi: PrenexQBF, mgr: Manager | None = None):
    """Belief-structure variant: agent i's observation law fixes every atom outside block i."""
    vocab = psi.vocabulary()
    mgr = mgr or Manager()
    vocab.declare(mgr)
    omega = {}
    for agent, _, vs in _agents(psi):
        own = {vocab[f'p{v}'] for v in vs}
        omega[agent] = mgr.conj(mgr.var(p).iff(mgr.var(p.at(1)))
                                for p in vocab if p not in own)
    F = BeliefStructure(vocab, mgr.true, omega)
    return F, frozenset(), _reduction_formula(psi, vocab)
