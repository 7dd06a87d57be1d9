import random

import pytest

from symdel.bdd import Manager
from symdel.corpus import random_bool
from symdel.logic import (
    BOT, TOP, And, Announce, K, LogicError, Not, Var, Vocabulary, bool_eval,
    compile_bool, disj, formula_length, iff, imp, khat, states_over,
)
from symdel.programs import of
from oracles import robdd_size


@pytest.fixture
def pqr():
    return Vocabulary.of('p q r')


def test_vocabulary_names_and_states(pqr):
    assert [pqr.name(a) for a in pqr] == ['p', 'q', 'r']
    assert pqr.state('p, r') == {pqr['p'], pqr['r']}
    assert pqr.name(pqr["q'"]) == "q'"
    with pytest.raises(LogicError):
        pqr.state('s')
    with pytest.raises(LogicError):
        Vocabulary.of('p p')


def test_event_atoms_never_collide(pqr):
    v2, fresh = pqr.with_events(['e', 'f'])
    assert not set(fresh) & set(pqr)
    assert list(v2) == list(pqr)
    v3, more = v2.with_events(['g'])
    assert more[0] not in fresh
    with pytest.raises(LogicError):
        v2.with_events(['p'])


def test_bool_eval_examples(pqr):
    p, q, r = (Var(a) for a in pqr)
    assert bool_eval(And(p, Not(q)), {pqr['p']})
    assert not bool_eval(BOT, set(pqr))
    assert bool_eval(of({pqr['p']}, set(pqr)), {pqr['p']})
    assert of({pqr['p']}, list(pqr)) == And(And(p, Not(q)), Not(r))


def test_bool_eval_unknown_atom():
    v = Vocabulary.of('p')
    other, (e,) = v.with_events(['e'])
    with pytest.raises(LogicError):
        bool_eval(Var(e), set(), v)
    with pytest.raises(LogicError):
        bool_eval(K('a', TOP), set())


def test_formula_length_examples(pqr):
    p, q = Var(pqr['p']), Var(pqr['q'])
    assert formula_length(p) == 1
    assert formula_length(K('i', And(p, q))) == 4
    assert formula_length(Announce(p, q)) == 3
    # sugar is counted in its elaborated core form
    assert formula_length(disj(p, q)) == formula_length(Not(And(Not(p), Not(q)))) == 6


def test_compile_bool_examples():
    v = Vocabulary.of('p')
    m = Manager()
    v.declare(m)
    p = v['p']
    assert compile_bool(TOP, m) == m.true
    f = compile_bool(iff(Var(p), Var(p.at(1))), m)
    # one p node, two p' nodes
    assert m.node_count(f) == robdd_size([True, False, False, True], 2)


def test_compile_bool_all_three_atom_tables(pqr):
    m = Manager()
    pqr.declare(m)
    atoms = list(pqr)
    states = list(states_over(atoms))
    for code in range(256):
        # disjunction of minterms selected by the code
        f = disj(*(And(And(*(Var(a) if a in s else Not(Var(a)) for a in atoms[:2])),
                       Var(atoms[2]) if atoms[2] in s else Not(Var(atoms[2])))
                   for k, s in enumerate(states) if code >> k & 1))
        b = compile_bool(f, m)
        for s in states:
            assert m.evaluate(b, s) == bool_eval(f, s)


def test_sugar_elaborates_to_core():
    v = Vocabulary.of('p q r s')
    rng = random.Random(1)
    for _ in range(200):
        a, b = random_bool(rng, list(v), 2), random_bool(rng, list(v), 2)
        for s in states_over(v):
            x, y = bool_eval(a, s), bool_eval(b, s)
            assert bool_eval(disj(a, b), s) == (x or y)
            assert bool_eval(imp(a, b), s) == ((not x) or y)
            assert bool_eval(iff(a, b), s) == (x == y)


def test_khat_is_dual_and_lengths_positive():
    v = Vocabulary.of('p')
    p = Var(v['p'])
    assert khat('a', p) == Not(K('a', Not(p)))
    rng = random.Random(2)
    from symdel.corpus import random_formula
    for _ in range(300):
        f = random_formula(rng, list(v), ['a', 'b'], 5)
        n = formula_length(f)
        assert n >= 1
        match f:
            case And(x, y) | Announce(x, y):
                assert n == formula_length(x) + formula_length(y) + 1
            case Not(x) | K(_, x):
                assert n == formula_length(x) + 1


def test_states_over_order():
    v = Vocabulary.of('p q')
    p, q = v
    assert list(states_over(v)) == [frozenset(), {q}, {p}, {p, q}]
