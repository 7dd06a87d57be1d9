import random

import pytest

from symdel.bdd import Manager
from symdel.corpus import random_del_case, random_formula
from symdel.frontend import parse_formula, parse_model
from symdel.kripke import PrenexQBF, qbf_to_instance
from symdel.logic import (
    BOT, TOP, Announce, Apply, Event, K, Not, Var, Vocabulary, formula_length, iff, khat,
)
from symdel.pspace import (
    CheckStats, announcement_tower, check, check_delk, model_check,
    reduce_announcements, tree_length,
)
from symdel.structures import (
    BeliefStructure, KnowledgeStructure, StructureError, announce, make_transformer,
    naive_check, states_of,
)

EXAMPLE1 = "vocab p q\nlaw Top\nomega A: q'\nomega B: p' & (q <-> q')\n"


def knowledge(names, obs, law=None):
    v = Vocabulary.of(names)
    m = Manager()
    v.declare(m)
    return KnowledgeStructure(v, m.true if law is None else law(v, m), obs(v))


def test_atomic_case():
    F = knowledge('p q', lambda v: {'a': frozenset()})
    p, q = F.vocab
    for s in states_of(F):
        assert check(F, [], s, Var(p)) == (p in s)


def test_qbf_structure_forall_exists():
    psi = PrenexQBF(2, (('a', (1,)), ('e', (2,))), ((1, -2), (-1, 2)))
    F, s, phi = qbf_to_instance(psi)
    p1, p2 = F.vocab
    assert F.obs == {'1': frozenset({p2}), '2': frozenset({p1})}
    assert phi == K('1', khat('2', psi.matrix(F.vocab)))
    assert check(F, [], s, phi)
    # written out by hand with the biconditional
    assert check(F, [], frozenset(), K('1', khat('2', iff(Var(p1), Var(p2)))))


def test_tower_matches_naive():
    F = knowledge('p', lambda v: {'i': frozenset()})
    p = F.vocab['p']
    for d in range(0, 5):
        phi = announcement_tower('i', p, d)
        for s in states_of(F):
            assert check(F, [], s, phi) == naive_check(F, s, phi)
    assert announcement_tower('i', p, 2) == Announce(Announce(K('i', Var(p)), K('i', Var(p))),
                                                     K('i', Var(p)))


def test_precondition_and_wrong_kinds():
    F = knowledge('p', lambda v: {'i': frozenset()}, law=lambda v, m: m.var(v['p']))
    with pytest.raises(StructureError):
        check(F, [], frozenset(), TOP)
    with pytest.raises(StructureError):
        check_delk(F, [], frozenset(F.vocab), TOP)


def test_announcement_list_matches_announced_structure():
    rng = random.Random(31)
    for _ in range(150):
        F = knowledge('p q', lambda v: {i: frozenset(a for a in v if rng.random() < 0.5)
                                        for i in 'ab'})
        L = [random_formula(rng, list(F.vocab), ['a', 'b'], 3) for _ in range(rng.randint(1, 2))]
        phi = random_formula(rng, list(F.vocab), ['a', 'b'], 3)
        G = F
        for ann in L:
            G = announce(G, ann)
        for s in states_of(G):
            assert check(F, L, s, phi) == naive_check(G, s, phi)


def toggle():
    m = Manager()
    v = Vocabulary.of('p')
    v.declare(m)
    p = v['p']
    F = BeliefStructure(v, m.true, {'a': m.var(p).iff(m.var(p.at(1)))})
    _, X = make_transformer(v, 'T', m, change={'p': Not(Var(p))})
    return F, X


def test_toggle_event():
    F, X = toggle()
    p = F.vocab['p']
    s = frozenset({p})
    phi = Apply(Event(X), Not(Var(p)))
    assert check_delk(F, [], s, phi)
    assert naive_check(F, s, phi)
    assert not check_delk(F, [], frozenset(), phi)


def test_impossible_event_is_vacuous():
    m = Manager()
    v = Vocabulary.of('p')
    v.declare(m)
    F = BeliefStructure(v, m.true, {'a': m.true})
    _, X = make_transformer(v, 'X', m, vplus=['e'], event_law=BOT)
    for s in states_of(F):
        for x in X.points():
            assert check_delk(F, [], s, Apply(Event(X, x), BOT))


def test_event_list_matches_nested_events():
    rng = random.Random(32)
    from symdel.corpus import random_belief_structure, random_transformer
    from symdel.structures import subst_point
    done = 0
    while done < 60:
        F = random_belief_structure(rng, rng.randint(1, 3))
        _, X = random_transformer(rng, F, f'x{done}_', factual=rng.random() < 0.5)
        s = rng.choice(list(states_of(F)))
        x = rng.choice(list(X.points()))
        if not naive_check(F, s, subst_point(X.event_law, X.vplus, x)):
            continue
        ev = Event(X, x)
        phi = random_formula(rng, list(F.vocab), list(F.agents), 3, ann_depth=0)
        want = naive_check(F, s, Apply(ev, phi))
        # the event list is replayed from the state before the events
        assert check_delk(F, [ev], s, phi) == want
        done += 1


def test_check_delk_matches_naive_random():
    rng = random.Random(33)
    for _ in range(120):
        F, phi, s = random_del_case(rng)
        assert check_delk(F, [], s, phi) == naive_check(F, s, phi)


def test_model_check_algorithms_agree_on_example1():
    model = parse_model(EXAMPLE1)
    F = model.structure
    for text in ('K B q', 'K A p', 'Khat A (q & ~p)', '[! p] K A p', 'K B ~q'):
        phi = parse_formula(text, F.vocab, agents=F.agents)
        for s in states_of(F):
            values = {model_check(F, s, phi, algo)[0] for algo in ('pspace', 'bdd', 'naive')}
            assert len(values) == 1


def test_model_check_dispatch_errors():
    F = knowledge('p', lambda v: {'i': frozenset()})
    with pytest.raises(ValueError):
        model_check(F, frozenset(), TOP, 'sat')
    F = knowledge('p', lambda v: {'i': frozenset()}, law=lambda v, m: m.var(v['p']))
    with pytest.raises(StructureError):
        model_check(F, frozenset(), TOP)


def test_knowledge_structure_with_events_goes_through_embedding():
    F = knowledge('p q', lambda v: {'a': frozenset({v['p']}), 'b': frozenset()})
    m = F.mgr
    _, X = make_transformer(F.vocab, 'X', m, change={'q': Var(F.vocab['p'])})
    phi = Apply(Event(X), K('a', Var(F.vocab['q'])))
    for s in states_of(F):
        assert model_check(F, s, phi, 'pspace')[0] == naive_check(F, s, phi)


def test_twelve_atoms_depth_two_completes():
    names = ' '.join(f'x{k}' for k in range(12))
    F = knowledge(names, lambda v: {'a': frozenset(list(v)[:6]), 'b': frozenset(list(v)[6:])})
    x0, x11 = F.vocab.atoms[0], F.vocab.atoms[-1]
    phi = K('a', khat('b', iff(Var(x0), Var(x11))))
    value, stats = model_check(F, frozenset(), phi, 'pspace')
    assert value
    assert stats.depth <= 10 and stats.peak_nodes == 0
    assert stats.valuations >= 2 ** 6


def test_naive_refuses_twenty_atoms():
    F = knowledge(' '.join(f'x{k}' for k in range(20)), lambda v: {'a': frozenset()})
    with pytest.raises(StructureError, match='guard'):
        model_check(F, frozenset(), TOP, 'naive')


def test_reverse_iteration_gives_same_answers():
    rng = random.Random(34)
    for _ in range(100):
        F, phi, s = random_del_case(rng)
        assert check_delk(F, [], s, phi) == check_delk(F, [], s, phi, reverse=True)
    for _ in range(100):
        F = knowledge('p q r', lambda v: {i: frozenset(a for a in v if rng.random() < 0.5)
                                          for i in 'ab'})
        phi = random_formula(rng, list(F.vocab), ['a', 'b'], 4)
        for s in states_of(F):
            assert check(F, [], s, phi) == check(F, [], s, phi, reverse=True)


def test_parallel_slices_agree():
    rng = random.Random(35)
    F = knowledge('p q r s', lambda v: {'a': frozenset(list(v)[:1]), 'b': frozenset(list(v)[2:])})
    cases = []
    for _ in range(6):
        cases.append(K('a', random_formula(rng, list(F.vocab), ['a', 'b'], 3)))
    cases.append(Not(K('b', Var(F.vocab.atoms[0]))))
    for phi in cases:
        s = frozenset(F.vocab.atoms[:2])
        assert model_check(F, s, phi, jobs=3)[0] == model_check(F, s, phi)[0]
    G = parse_model(EXAMPLE1).structure
    phi = parse_formula('K A q', G.vocab, agents=G.agents)
    for s in states_of(G):
        assert model_check(G, s, phi, jobs=2)[0] == naive_check(G, s, phi)


def test_stats_serialization():
    st = CheckStats(3, 10, 0)
    assert str(st) == 'depth=3 valuations=10 peak_nodes=0'
    other = CheckStats(5, 2, 7)
    st.merge(other)
    assert (st.depth, st.valuations, st.peak_nodes) == (5, 12, 7)


def test_reduction_axioms_preserve_truth_and_blow_up():
    rng = random.Random(36)
    F = knowledge('p q', lambda v: {'a': frozenset({v['p']}), 'b': frozenset()})
    for _ in range(150):
        phi = random_formula(rng, list(F.vocab), ['a', 'b'], 4, ann_depth=2)
        red = reduce_announcements(phi)
        for s in states_of(F):
            assert naive_check(F, s, red) == naive_check(F, s, phi)
    p = F.vocab['p']
    lengths = [tree_length(reduce_announcements(announcement_tower('a', p, d))) for d in range(1, 7)]
    assert all(b >= 2 * a for a, b in zip(lengths, lengths[1:]))
    assert formula_length(announcement_tower('a', p, 6)) == 3 * 6 + 2
