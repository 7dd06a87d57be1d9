"""Translations between mental programs and relation BDDs.

`mp_to_bdd` encodes a program as a BDD over V and V' (the pair s, t is
related iff s together with the primed t satisfies it).  `bdd_to_mp` goes
the other way by walking the diagram along the interleaved order
p < p' < q < q' < ...; it works on the shared DAG with memoization.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .bdd import Atom, Bdd, Manager
from .logic import And, Not, Var, Vocabulary, compile_bool, disj, states_over
from .programs import (
    ABORT, SKIP, Assign, Inter, Program, Seq, Test, Union,
)


class TranslationError(Exception):
    pass


def identity(mgr: Manager, vocab: Iterable[Atom]) -> Bdd:
    return mgr.conj(mgr.var(p).iff(mgr.var(p.at(1))) for p in vocab)


def frame(mgr: Manager, vocab: Iterable[Atom], changed: Atom) -> Bdd:
    """Every atom other than `changed` keeps its value."""
    return mgr.conj(mgr.var(q).iff(mgr.var(q.at(1))) for q in vocab if q != changed)


def mp_to_bdd(pi: Program, vocab: Sequence[Atom], mgr: Manager) -> Bdd:
    """Relation BDD over V and V' of a program over V."""
    V = list(vocab)
    for p in V:
        for k in range(3):
            if not mgr.has(p.at(k)):
                mgr.declare(p.at(k))
    ident = identity(mgr, V)
    lift = {**{p.at(1): p.at(2) for p in V}, **{p: p.at(1) for p in V}}
    lower = {p.at(2): p.at(1) for p in V}
    primes = [p.at(1) for p in V]
    memo: dict[int, Bdd] = {}

    def tr(q: Program) -> Bdd:
        r = memo.get(id(q))
        if r is not None:
            return r
        match q:
            case Assign(a, value):
                if a not in V:
                    raise TranslationError(f'assignment to {a} outside the vocabulary')
                r = mgr.var(a.at(1)) if value else ~mgr.var(a.at(1))
                r = r & frame(mgr, V, a)
            case Test(c):
                r = compile_bool(c, mgr) & ident
            case Union(a, b):
                r = tr(a) | tr(b)
            case Inter(a, b):
                r = tr(a) & tr(b)
            case Seq(a, b):
                step = mgr.exists(primes, tr(a) & mgr.relabel(tr(b), lift))
                r = mgr.relabel(step, lower)
            case _:
                raise TranslationError(f'not a program: {q!r}')
        memo[id(q)] = r
        return r

    result = tr(pi)
    leftover = [a for a in mgr.support(result) if a.prime > 1 or a.at(0) not in V]
    if leftover:
        raise TranslationError(f'translation left foreign atoms behind: {leftover}')
    return result


@dataclass
class TauStats:
    calls: int = 0
    violations: int = 0


def bdd_to_mp(omega: Bdd, atoms: Sequence[Atom], stats: TauStats | None = None) -> Program:
    """Mental program with the same relation as `omega`, walking the list `atoms`.

    The manager order must interleave every listed atom with its prime,
    p_0 < p_0' < p_1 < p_1' < ...; otherwise rebuild the diagram under
    such an order first.
    """
    mgr = omega.mgr
    L = list(atoms)
    seq_ranks = []
    for p in L:
        if p.prime != 0:
            raise TranslationError('the atom list must hold unprimed atoms')
        if not (mgr.has(p) and mgr.has(p.at(1))):
            raise TranslationError(f'atom {p} is not declared with its prime')
        seq_ranks.extend((mgr.rank(p), mgr.rank(p.at(1))))
    if any(a >= b for a, b in zip(seq_ranks, seq_ranks[1:])):
        raise TranslationError(
            'variable order is not interleaved (p < p\' < q < q\' ...); '
            'rebuild the diagram under an interleaved order before translating')
    pos = {p: k for k, p in enumerate(L)}
    for a in mgr.support(omega):
        if a.prime > 1 or a.at(0) not in pos:
            raise TranslationError(f'diagram mentions {a}, which is not in the atom list')
    stats = stats if stats is not None else TauStats()
    n = len(L)
    need = 4 * (2 * n + 10) + 200
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)
    memo: dict[tuple[int, int], Program] = {}
    either = [Union(Assign(p, False), Assign(p, True)) for p in L]

    def measure(u: Bdd, k: int):
        return mgr.node_count(u), n - k

    def call(u: Bdd, k: int, parent) -> Program:
        stats.calls += 1
        if parent is not None:
            m = measure(u, k)
            if not m < parent:
                stats.violations += 1
        return tau(u, k)

    def tau(u: Bdd, k: int) -> Program:
        key = (u.node, k)
        r = memo.get(key)
        if r is not None:
            return r
        here = measure(u, k)
        if u.is_false:
            r = ABORT
        elif u.is_true:
            r = SKIP if k == n else Seq(either[k], call(u, k + 1, here))
        else:
            a, lo, hi = mgr.succ(u)
            i = pos[a.at(0)]
            if k == n or i < k:
                raise TranslationError(f'node on {a} reached after its list position')
            p = L[k]
            if i > k:
                r = Seq(either[k], call(u, k + 1, here))
            elif a.prime == 0:
                r = Union(Seq(Test(Not(Var(p))), call(lo, k, here)),
                          Seq(Test(Var(p)), call(hi, k, here)))
            else:
                r = Union(Seq(Assign(p, False), call(lo, k + 1, here)),
                          Seq(Assign(p, True), call(hi, k + 1, here)))
        memo[key] = r
        return r

    return call(omega, 0, None)


def bdd_to_mp0(omega: Bdd, vocab: Vocabulary | Sequence[Atom],
               stats: TauStats | None = None) -> Program:
    """`bdd_to_mp` over the whole vocabulary in its order."""
    return bdd_to_mp(omega, list(vocab), stats)


def relation_of_bdd(omega: Bdd, vocab: Sequence[Atom]) -> set:
    mgr = omega.mgr
    V = list(vocab)
    return {(s, t) for s in states_over(V) for t in states_over(V)
            if mgr.evaluate(omega, s | {a.at(1) for a in t})}


# -- witness families -----------------------------------------------------

class Witness(NamedTuple):
    program: Program
    vocab: Vocabulary
    order: tuple[Atom, ...]


def blowup_formula(vocab: Vocabulary, n: int):
    p = vocab.atoms
    return disj(*(And(Var(p[i]), Var(p[n + i])) for i in range(n)))


def blowup_witness(n: int) -> Witness:
    """?((p1 & p(n+1)) | ... | (pn & p2n)) with the order p1 < p1' < ... < p2n < p2n'."""
    if n < 1:
        raise ValueError('n must be at least 1')
    vocab = Vocabulary([f'p{i}' for i in range(1, 2 * n + 1)])
    order = tuple(a.at(k) for a in vocab for k in range(3))
    return Witness(Test(blowup_formula(vocab, n)), vocab, order)


def contrast_order(vocab: Vocabulary, n: int) -> tuple[Atom, ...]:
    """Order placing p_i next to p_(n+i): the small-diagram order for the witness."""
    p = vocab.atoms
    pairs = [a for i in range(n) for a in (p[i], p[n + i])]
    return tuple(a.at(k) for a in pairs for k in range(3))


def exactly(mgr: Manager, atoms: Sequence[Atom], k: int) -> Bdd:
    """Threshold diagram: exactly k of `atoms` are true."""
    atoms = sorted(atoms, key=mgr.rank)
    n = len(atoms)
    # row[c] = "exactly k - c of the atoms from position i on are true"
    row = [mgr.true if c == k else mgr.false for c in range(n + 2)]
    for i in range(n - 1, -1, -1):
        x = mgr.var(atoms[i])
        row = [mgr.ite(x, row[c + 1] if c + 1 <= n + 1 else mgr.false, row[c])
               for c in range(n + 1)] + [mgr.false]
    return row[0]


def grid_relation(vocab: Sequence[Atom], mgr: Manager) -> Bdd:
    """Identity restricted to states with exactly ceil(|V|/2) true atoms."""
    V = list(vocab)
    for p in V:
        for k in range(3):
            if not mgr.has(p.at(k)):
                mgr.declare(p.at(k))
    return identity(mgr, V) & exactly(mgr, V, (len(V) + 1) // 2)
