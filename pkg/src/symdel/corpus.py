"""Seeded generators for structures, formulas, programs and QBFs.

Everything takes an explicit `random.Random`, so a seed reproduces the
same corpus on every run.
"""
from __future__ import annotations

import random
from itertools import product
from typing import Sequence

from .bdd import Atom, Bdd, Manager
from .kripke import EXISTS, FORALL, PrenexQBF
from .logic import (
    BOT, TOP, And, Announce, Apply, Event, Formula, K, Not, Var, Vocabulary,
    disj, iff, imp, khat, states_over,
)
from .programs import Assign, Inter, Program, Seq, Test, Union
from .structures import BeliefStructure, KnowledgeStructure, Transformer


def function_from_table(mgr: Manager, atoms: Sequence[Atom], table: Sequence[bool]) -> Bdd:
    """Diagram of the function whose value on the k-th subset (lexicographic) is table[k]."""
    atoms = sorted(atoms, key=mgr.rank)
    n = len(atoms)
    layer = [mgr.true if v else mgr.false for v in table]
    for i in range(n - 1, -1, -1):
        x = mgr.var(atoms[i])
        layer = [mgr.ite(x, layer[2 * k + 1], layer[2 * k]) for k in range(len(layer) // 2)]
    return layer[0]


def random_function(rng: random.Random, mgr: Manager, atoms: Sequence[Atom],
                    density: float = 0.5) -> Bdd:
    return function_from_table(mgr, atoms, [rng.random() < density for _ in range(1 << len(atoms))])


def random_bool(rng: random.Random, atoms: Sequence[Atom], depth: int) -> Formula:
    if depth <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.06:
            return TOP
        if r < 0.12:
            return BOT
        return Var(rng.choice(atoms))
    k = rng.randrange(5)
    if k == 0:
        return Not(random_bool(rng, atoms, depth - 1))
    a, b = random_bool(rng, atoms, depth - 1), random_bool(rng, atoms, depth - 1)
    return (And, disj, imp, iff)[k - 1](a, b)


def random_formula(rng: random.Random, atoms: Sequence[Atom], agents: Sequence[str],
                   depth: int, *, k_depth: int = 2, ann_depth: int = 3,
                   events: Sequence[Transformer] = ()) -> Formula:
    """Random formula with bounded knowledge nesting and announcement nesting."""
    if depth <= 0 or rng.random() < 0.2:
        return Var(rng.choice(atoms)) if rng.random() < 0.9 else rng.choice((TOP, BOT))
    choices = ['not', 'and', 'or']
    if agents and k_depth > 0:
        choices += ['K', 'K', 'Khat']
    if ann_depth > 0:
        choices += ['ann']
    if events:
        choices += ['event']
    c = rng.choice(choices)
    sub = lambda **kw: random_formula(rng, atoms, agents, depth - 1, **{
        'k_depth': k_depth, 'ann_depth': ann_depth, 'events': events, **kw})
    if c == 'not':
        return Not(sub())
    if c == 'and':
        return And(sub(), sub())
    if c == 'or':
        return disj(sub(), sub())
    if c == 'K':
        return K(rng.choice(agents), sub(k_depth=k_depth - 1))
    if c == 'Khat':
        return khat(rng.choice(agents), sub(k_depth=k_depth - 1))
    if c == 'ann':
        return Announce(sub(ann_depth=ann_depth - 1), sub(ann_depth=ann_depth - 1))
    X = rng.choice(events)
    point = frozenset(e for e in X.vplus if rng.random() < 0.5)
    return Apply(Event(X, point), sub(events=()))


def announcement_nesting(f: Formula) -> int:
    match f:
        case Announce(a, b):
            return 1 + max(announcement_nesting(a), announcement_nesting(b))
        case Not(a) | K(_, a):
            return announcement_nesting(a)
        case And(a, b):
            return max(announcement_nesting(a), announcement_nesting(b))
    return 0


def pal_corpus(vocab: Vocabulary, agents: Sequence[str], size: int = 50,
               seed: int = 2024) -> list[Formula]:
    """Fixed PAL corpus: hand-picked classics followed by seeded random formulas."""
    p, q = vocab.atoms[0], vocab.atoms[-1]
    a, b = agents[0], agents[-1]
    kp = K(a, Var(p))
    fixed = [
        kp, K(b, Var(q)), khat(a, And(Var(p), Not(Var(q)))),
        Announce(Var(p), kp), Announce(kp, kp), Announce(Announce(kp, kp), kp),
        Announce(Not(kp), K(b, Not(kp))), K(a, K(b, Var(q))),
        Announce(disj(Var(p), Var(q)), K(a, disj(Var(p), Var(q)))),
        Announce(Announce(Var(q), K(b, Var(p))), Announce(Var(p), khat(a, Var(q)))),
    ]
    rng = random.Random(seed)
    out = list(fixed)
    while len(out) < size:
        f = random_formula(rng, vocab.atoms, agents, 5, k_depth=2, ann_depth=3)
        if f not in out:
            out.append(f)
    return out[:size]


def all_boolean_functions(mgr: Manager, atoms: Sequence[Atom]) -> list[Bdd]:
    n = 1 << len(atoms)
    return [function_from_table(mgr, atoms, [bool(code >> k & 1) for k in range(n)])
            for code in range(1 << n)]


def exhaustive_knowledge_structures(vocab: Vocabulary, mgr: Manager,
                                    agents: Sequence[str] = ('a', 'b')):
    """Every state law paired with every assignment of observables to the agents."""
    laws = all_boolean_functions(mgr, vocab.atoms)
    subsets = list(states_over(vocab.atoms))
    for law in laws:
        for obs in product(subsets, repeat=len(agents)):
            yield KnowledgeStructure(vocab, law, dict(zip(agents, obs)))


def random_belief_structure(rng: random.Random, n_atoms: int, agents: Sequence[str] = ('a', 'b'),
                            mgr: Manager | None = None) -> BeliefStructure:
    vocab = Vocabulary([chr(ord('p') + k) for k in range(n_atoms)])
    mgr = mgr or Manager()
    vocab.declare(mgr)
    law = random_function(rng, mgr, vocab.atoms, 0.7)
    if law.is_false:
        law = mgr.true
    both = [a.at(k) for a in vocab for k in (0, 1)]
    omega = {i: random_function(rng, mgr, both, rng.choice((0.3, 0.5, 0.7))) for i in agents}
    return BeliefStructure(vocab, law, omega)


def random_transformer(rng: random.Random, F: BeliefStructure, name: str, *,
                       factual: bool, max_events: int = 2,
                       vocab: Vocabulary | None = None) -> tuple[Vocabulary, Transformer]:
    """Random transformer over F's atoms; returns the grown name table too."""
    mgr = F.mgr
    table = vocab or F.vocab
    k = rng.randint(0, max_events)
    table, fresh = table.with_events([f'{name}{j}' for j in range(k)])
    table.declare(mgr, fresh)
    scope = list(F.vocab) + list(fresh)
    agents = list(F.agents)
    if fresh and rng.random() < 0.5:
        law = imp(Var(fresh[0]), random_formula(rng, list(F.vocab), agents, 2, k_depth=1,
                                                ann_depth=0))
    else:
        law = random_formula(rng, scope, agents, 2, k_depth=1, ann_depth=1)
        if rng.random() < 0.5:
            law = disj(law, Var(fresh[0])) if fresh else disj(law, TOP)
    change = {}
    if factual:
        for q in F.vocab:
            if rng.random() < 0.5:
                change[q] = random_bool(rng, scope, 2)
        if not change:
            q = rng.choice(F.vocab.atoms)
            change[q] = random_bool(rng, scope, 2)
    omegas = {}
    for i in agents:
        r = rng.random()
        if r < 0.2:
            continue        # default: agent observes the event atoms
        pool = [e.at(j) for e in fresh for j in (0, 1)]
        if r > 0.8:
            pool += [a.at(j) for a in F.vocab for j in (0, 1)]
        if not pool:
            continue
        omegas[i] = random_function(rng, mgr, pool, rng.choice((0.4, 0.6, 0.8)))
    X = Transformer(name, table, tuple(fresh), law, tuple(change), change, omegas)
    return table, X


def random_del_case(rng: random.Random, *, max_atoms: int = 3):
    """A belief structure, a formula with up to two stacked events, and a state."""
    F = random_belief_structure(rng, rng.randint(1, max_atoms))
    factual = rng.random() < 0.5
    table = F.vocab
    stack = rng.randint(0, 2)
    trans = []
    for j in range(stack):
        table, X = random_transformer(rng, F, f'e{j}x', factual=factual, vocab=table)
        trans.append(X)
    agents = list(F.agents)
    body = random_formula(rng, list(F.vocab), agents, 3, k_depth=2, ann_depth=1)
    f = body
    for X in reversed(trans):
        point = frozenset(e for e in X.vplus if rng.random() < 0.5)
        inner = f
        if rng.random() < 0.5:
            inner = K(rng.choice(agents), inner)
        f = Apply(Event(X, point), inner)
    if rng.random() < 0.3:
        f = K(rng.choice(agents), f)
    states = list(F.mgr.all_sat(F.law, F.vocab.atoms))
    return F, f, rng.choice(states)


def random_program(rng: random.Random, atoms: Sequence[Atom], depth: int) -> Program:
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.6:
            return Assign(rng.choice(atoms), rng.random() < 0.5)
        return Test(random_bool(rng, atoms, 2))
    ctor = rng.choice((Union, Seq, Seq, Inter))
    return ctor(random_program(rng, atoms, depth - 1), random_program(rng, atoms, depth - 1))


def random_qbf(rng: random.Random, max_vars: int = 6, max_blocks: int = 3) -> PrenexQBF:
    n = rng.randint(1, max_vars)
    vs = list(range(1, n + 1))
    rng.shuffle(vs)
    nb = rng.randint(1, min(max_blocks, n))
    cuts = sorted(rng.sample(range(1, n), nb - 1)) if nb > 1 else []
    parts = [vs[a:b] for a, b in zip([0] + cuts, cuts + [n])]
    first = rng.choice((FORALL, EXISTS))
    blocks = []
    for k, part in enumerate(parts):
        kind = first if k % 2 == 0 else (EXISTS if first == FORALL else FORALL)
        blocks.append((kind, tuple(sorted(part))))
    clauses = []
    for _ in range(rng.randint(1, 2 * n + 1)):
        width = rng.randint(1, min(3, n))
        lits = rng.sample(range(1, n + 1), width)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in lits))
    return PrenexQBF(n, tuple(blocks), tuple(clauses))
