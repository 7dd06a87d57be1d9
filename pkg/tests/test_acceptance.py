"""Acceptance suite: nine criteria, each printing one PASS/FAIL line.

Run under pytest, or directly with `python3 tests/test_acceptance.py`.
"""
import random
import sys
import time
from itertools import product

import pytest

from symdel.bdd import Manager
from symdel.corpus import (
    announcement_nesting, exhaustive_knowledge_structures, pal_corpus, random_bool,
    random_del_case, random_program, random_qbf,
)
from symdel.frontend import parse_formula, parse_model
from symdel.kripke import (
    EXISTS, FORALL, PrenexQBF, kripke_check, qbf_eval, qbf_length, qbf_to_belief_instance,
    qbf_to_instance, structure_to_kripke,
)
from symdel.logic import (
    Announce, Not, Var, Vocabulary, compile_bool, formula_length, k_depth, states_over,
)
from symdel.programs import (
    ABORT, SKIP, Assign, Inter, Seq, Test as Probe, Union, change, of, related, relation_of,
    successors,
)
from symdel.pspace import (
    CheckStats, announcement_tower, check, check_delk, model_check,
)
from symdel.structures import (
    KnowledgeStructure, naive_check, states_of,
)
from symdel.translations import (
    TauStats, bdd_to_mp0, blowup_formula, blowup_witness, identity, mp_to_bdd,
    relation_of_bdd,
)

EXAMPLE1 = "vocab p q\nlaw Top\nomega A: q'\nomega B: p' & (q <-> q')\n"

RESULTS: dict[int, bool] = {}


def report(capsys, n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = ok
    line = f'criterion {n}: {"PASS" if ok else "FAIL"} - {detail}'
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print('\n' + line)
    assert ok, line


# -- shared corpora --------------------------------------------------------

V3 = Vocabulary.of('p q r')
PROGRAM_SEED = 4004
RELATION_SEED = 5005


def program_corpus():
    rng = random.Random(PROGRAM_SEED)
    return [random_program(rng, list(V3), 4) for _ in range(1000)]


def relation_corpus(mgr):
    rng = random.Random(RELATION_SEED)
    both = [a.at(k) for a in V3 for k in (0, 1)]
    return [compile_bool(random_bool(rng, both, 5), mgr) for _ in range(500)]


def interleaved():
    m = Manager()
    V3.declare(m)
    return m


# -- criteria ----------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    vocab = Vocabulary.of('p q')
    mgr = Manager()
    vocab.declare(mgr)
    corpus = pal_corpus(vocab, ['a', 'b'], 50)
    assert len(corpus) == 50
    assert all(k_depth(f) <= 2 and announcement_nesting(f) <= 3 for f in corpus)
    cases = bad = structures = 0
    for F in exhaustive_knowledge_structures(vocab, mgr):
        structures += 1
        M = structure_to_kripke(F)
        for s in states_of(F):
            for phi in corpus:
                cases += 1
                a = check(F, [], s, phi)
                if not (a == naive_check(F, s, phi) == kripke_check(M, s, phi)):
                    bad += 1
    dt = time.perf_counter() - t0
    ok = structures == 256 and bad == 0 and dt < 60
    return ok, f'{structures} structures, {cases} cases, {bad} disagreements, {dt:.1f}s (< 60s)'


def criterion_2():
    t0 = time.perf_counter()
    rng = random.Random(2002)
    bad = factual = stacked = 0
    for _ in range(500):
        F, phi, s = random_del_case(rng)
        events = _events_of(phi)
        assert len(F.vocab) <= 3 and all(len(X.vplus) <= 2 for X in events)
        factual += any(X.modified for X in events)
        stacked += len(events)
        if check_delk(F, [], s, phi) != naive_check(F, s, phi):
            bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 120
    return ok, (f'500 cases ({factual} with factual change, {stacked} events), '
                f'{bad} disagreements, {dt:.1f}s (< 120s)')


def _events_of(phi):
    from symdel.logic import And, Apply, K
    out = []
    stack = [phi]
    while stack:
        f = stack.pop()
        match f:
            case Apply(ev, a):
                out.append(ev.transformer)
                stack.append(a)
            case Not(a) | K(_, a):
                stack.append(a)
            case And(a, b) | Announce(a, b):
                stack.extend((a, b))
    return out


def criterion_3():
    rng = random.Random(3003)
    fixed = [(PrenexQBF(2, ((FORALL, (1,)), (EXISTS, (2,))), ((1, -2), (-1, 2))), True),
             (PrenexQBF(2, ((EXISTS, (1,)), (FORALL, (2,))), ((1, -2), (-1, 2))), False)]
    cases = fixed + [(random_qbf(rng, 6, 3), None) for _ in range(200)]
    bad = long_ = big = 0
    worst = 0
    for psi, want in cases:
        truth = qbf_eval(psi)
        if want is not None and truth != want:
            bad += 1
        F, s, phi = qbf_to_instance(psi)
        G, s2, phi2 = qbf_to_belief_instance(psi)
        if not (check(F, [], s, phi) == truth == check_delk(G, [], s2, phi2)):
            bad += 1
        gap = formula_length(phi) - qbf_length(psi)
        worst = max(worst, abs(gap))
        if abs(gap) > 2:
            long_ += 1
        for w in G.omega.values():
            if G.mgr.node_count(w) > 4 * len(G.vocab):
                big += 1
    ok = bad == long_ == big == 0
    return ok, (f'{len(cases)} QBFs, {bad} wrong answers, max length gap {worst} (<= 2), '
                f'{big} observation laws above 4|V| nodes')


def criterion_4():
    t0 = time.perf_counter()
    mgr = interleaved()
    states = list(states_over(V3))
    bad = pairs = 0
    for prog in program_corpus():
        omega = mp_to_bdd(prog, list(V3), mgr)
        for s, t in product(states, repeat=2):
            pairs += 1
            if related(prog, s, t) != mgr.evaluate(omega, s | {a.at(1) for a in t}):
                bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and pairs == 64000 and dt < 60
    return ok, f'1000 programs, {pairs} pairs, {bad} mismatches, {dt:.1f}s (< 60s)'


TAU = TauStats()


def criterion_5():
    t0 = time.perf_counter()
    mgr = interleaved()
    bad = 0
    for omega in relation_corpus(mgr):
        if relation_of(bdd_to_mp0(omega, V3, TAU), V3) != relation_of_bdd(omega, V3):
            bad += 1
    trips = 0
    for prog in program_corpus():
        back = bdd_to_mp0(mp_to_bdd(prog, list(V3), mgr), V3, TAU)
        if relation_of(back, V3) != relation_of(prog, V3):
            trips += 1
    dt = time.perf_counter() - t0
    ok = bad == trips == 0 and dt < 120
    return ok, (f'500 diagrams with {bad} mismatches, 1000 round trips with {trips} '
                f'mismatches, {dt:.1f}s (< 120s)')


def criterion_6():
    t0 = time.perf_counter()
    sizes = {}
    for n in (2, 3, 4, 5):
        w = blowup_witness(n)
        mgr = Manager(w.order)
        sizes[n] = mgr.node_count(mp_to_bdd(w.program, list(w.vocab), mgr))
    dt = time.perf_counter() - t0
    ok = all(sizes[n] >= 2 ** (n + 1) for n in sizes) and dt < 10
    shown = ', '.join(f'n={n}: {k} >= {2 ** (n + 1)}' for n, k in sizes.items())
    return ok, f'{shown}; {dt:.2f}s (< 10s)'


def criterion_7():
    if TAU.calls == 0:
        criterion_5()
    ok = TAU.violations == 0 and TAU.calls > 0
    return ok, f'{TAU.calls} recursive calls, {TAU.violations} without a lexicographic decrease'


def criterion_8():
    vocab = Vocabulary(['p'])
    depths, peaks = [], []
    for d in range(1, 9):
        mgr = Manager()
        vocab.declare(mgr)
        F = KnowledgeStructure(vocab, mgr.true, {'i': frozenset()})
        phi = announcement_tower('i', vocab['p'], d)
        stats = CheckStats()
        value = check(F, [], frozenset(vocab), phi, stats)
        assert value == naive_check(F, frozenset(vocab), phi)
        depths.append(stats.depth)
        peaks.append(stats.peak_nodes)
    steps = [b - a for a, b in zip(depths, depths[1:])]
    tower_ok = len(set(peaks)) == 1 and min(steps) >= 1 and max(steps) <= 2
    beta = {}
    for n in (2, 3, 4, 5):
        w = blowup_witness(n)
        phi = Announce(blowup_formula(w.vocab, n), Var(w.vocab.atoms[0]))
        s = frozenset(w.vocab)
        row = []
        for algo in ('bdd', 'pspace'):
            mgr = Manager(w.order)
            F = KnowledgeStructure(w.vocab, mgr.true, {'i': frozenset()})
            row.append(model_check(F, s, phi, algo)[1].peak_nodes)
        beta[n] = row
    beta_ok = all(b >= 2 ** (n + 1) and p <= 64 for n, (b, p) in beta.items())
    ok = tower_ok and beta_ok
    return ok, (f'tower d=1..8: peak {peaks[0]} throughout, depth {depths}; '
                f'beta n=2..5 (bdd, pspace) peaks {[beta[n] for n in beta]}')


def criterion_9():
    problems = []
    # the two queries on the first example
    F = parse_model(EXAMPLE1).structure
    p, q = F.vocab
    w = frozenset({p, q})
    M = structure_to_kripke(F)
    for text, want in (('K B q', True), ('K A p', False)):
        phi = parse_formula(text, F.vocab, agents=F.agents)
        got = {model_check(F, w, phi, a)[0] for a in ('pspace', 'bdd', 'naive')}
        got.add(kripke_check(M, w, phi))
        if got != {want}:
            problems.append(text)
    problems += relation_rows()
    # successor sets
    V = Vocabulary.of('p q')
    a, b = V
    both = frozenset({a, b})
    if not related(Assign(b, False), both, {a}):
        problems.append('q<-F')
    if set(successors(Union(Assign(a, False), Assign(b, False)), both)) != {
            frozenset({a}), frozenset({b})}:
        problems.append('union successors')
    ok = not problems
    return ok, 'all examples hold' if ok else f'failed: {problems}'


def relation_rows():
    """Each row of the relation table over V = {p, q}, realized every available way."""
    V = Vocabulary.of('p q')
    m = Manager()
    V.declare(m)
    p, q = V
    states = list(states_over(V))
    same = lambda x: m.var(x).iff(m.var(x.at(1)))

    def by_obs(o):
        return {(s, t) for s in states for t in states if s & o == t & o}

    def by_bdd(b):
        return relation_of_bdd(b, V)

    def by_prog(x):
        return relation_of(x, V)

    rows = {
        'empty': [by_prog(ABORT), by_bdd(m.false)],
        'total': [by_prog(change(list(V))), by_bdd(m.true), by_obs(frozenset())],
        'observe p': [by_prog(change([q])), by_bdd(same(p)), by_obs(frozenset({p}))],
        'observe p q': [by_prog(change([])), by_bdd(same(p) & same(q)), by_obs(frozenset(V))],
        'identity': [by_prog(SKIP), by_bdd(identity(m, V)), by_obs(frozenset(V))],
    }
    for s, t in product(states, repeat=2):
        prog = Seq(Seq(Probe(of(s, list(V))), change(list(V))), Probe(of(t, list(V))))
        edge = compile_bool(of(s, list(V)), m) & m.relabel(compile_bool(of(t, list(V)), m),
                                                           {x: x.at(1) for x in V})
        rows[f'edge {sorted(s)}->{sorted(t)}'] = [by_prog(prog), by_bdd(edge), {(s, t)}]
    rng = random.Random(9009)
    everything = {(s, t) for s in states for t in states}
    for k in range(20):
        beta = compile_bool(random_bool(rng, [x.at(j) for x in V for j in (0, 1)], 3), m)
        swapped = m.relabel(beta, {**{x: x.at(1) for x in V}, **{x.at(1): x for x in V}})
        rows[f'complement {k}'] = [by_bdd(~beta), everything - by_bdd(beta)]
        rows[f'inverse {k}'] = [by_bdd(swapped), {(t, s) for s, t in by_bdd(beta)}]
        pi1, pi2 = random_program(rng, list(V), 3), random_program(rng, list(V), 3)
        r1, r2 = by_prog(pi1), by_prog(pi2)
        composed = {(s, u) for s, t in r1 for t2, u in r2 if t == t2}
        rows[f'composition {k}'] = [by_prog(Seq(pi1, pi2)),
                                    by_bdd(mp_to_bdd(Seq(pi1, pi2), list(V), m)), composed]
        b1, b2 = mp_to_bdd(pi1, list(V), m), mp_to_bdd(pi2, list(V), m)
        o1 = frozenset(x for x in V if rng.random() < 0.5)
        o2 = frozenset(x for x in V if rng.random() < 0.5)
        rows[f'intersection {k}'] = [by_prog(Inter(pi1, pi2)), by_bdd(b1 & b2), r1 & r2]
        rows[f'observer intersection {k}'] = [by_obs(o1) & by_obs(o2), by_obs(o1 | o2)]
    return [name for name, ways in rows.items() if any(w != ways[0] for w in ways[1:])]


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


@pytest.mark.parametrize('n', sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n]()
    report(capsys, n, ok, detail)


if __name__ == '__main__':
    failed = 0
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        print(f'criterion {n}: {"PASS" if ok else "FAIL"} - {detail}')
        failed += not ok
    sys.exit(1 if failed else 0)
