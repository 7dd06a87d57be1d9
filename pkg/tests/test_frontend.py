import random

import pytest
from hypothesis import given, settings, strategies as st

from symdel.corpus import random_program, random_qbf
from symdel.frontend import (
    SourceError, format_formula, format_model, format_program, format_qdimacs,
    parse_bool, parse_formula, parse_model, parse_program, parse_qdimacs,
)
from symdel.kripke import qbf_eval
from symdel.logic import (
    BOT, TOP, And, Announce, Apply, Event, K, Not, Var, Vocabulary, iff, khat, states_over,
)
from symdel.programs import ABORT, Assign, Seq, Union, relation_of
from symdel.structures import BeliefStructure, KnowledgeStructure, states_of

EXAMPLE1 = """\
# two agents, two atoms
vocab p q
law Top
omega A: q'
omega B: p' & (q <-> q')
state p q
"""

V = Vocabulary.of('p q r')
p, q, r = (Var(a) for a in V)


def test_formula_examples():
    assert parse_formula('K a (p & q)', V) == K('a', And(p, q))
    assert parse_formula('[! K a p] K a p', V) == Announce(K('a', p), K('a', p))
    assert parse_formula('~K a ~p', V) == parse_formula('Khat a p', V) == khat('a', p)


def test_formula_precedence():
    assert parse_formula('p & q | r', V) == parse_formula('(p & q) | r', V)
    assert parse_formula('p -> q -> r', V) == parse_formula('p -> (q -> r)', V)
    assert parse_formula('p <-> q', V) == iff(p, q)
    assert parse_formula('~p & q', V) == And(Not(p), q)
    assert parse_formula('K a p & q', V) == And(K('a', p), q)
    assert parse_formula('Top & Bot', V) == And(TOP, BOT)


def test_formula_unicode_aliases():
    assert parse_formula('¬p ∧ q', V) == And(Not(p), q)


def test_formula_errors_carry_positions():
    for text in ('p &', 'K p', '(p', 'p q', '[! p p', "p'", 'z'):
        with pytest.raises(SourceError) as e:
            parse_formula(text, V, agents=['a'])
        assert 0 <= e.value.offset <= len(text)
        assert e.value.line == 1 and e.value.col >= 1


def test_error_line_and_column():
    with pytest.raises(SourceError) as e:
        parse_model('vocab p q\nlaw p &\n')
    assert e.value.line == 2


def test_unknown_agent_rejected():
    with pytest.raises(SourceError):
        parse_formula('K c p', V, agents=['a', 'b'])


def test_parse_bool_rejects_modalities_and_primes():
    assert parse_bool("p & ~q", V) == And(p, Not(q))
    with pytest.raises(SourceError):
        parse_bool('K a p', V)
    with pytest.raises(SourceError):
        parse_bool("p'", V)
    assert parse_bool("p'", V, primes=1) == Var(V['p'].at(1))


def test_program_examples():
    W = Vocabulary.of('p q')
    a, b = W
    prog = parse_program('(p <- F U p <- T) ; q <- T', W)
    assert prog == Seq(Union(Assign(a, False), Assign(a, True)), Assign(b, True))
    assert parse_program('? Bot', W) == ABORT
    assert parse_program('p <- T', W) == Assign(a, True)


def test_program_precedence():
    W = Vocabulary.of('p q')
    x = parse_program('p <- T U q <- T ; p <- F', W)
    assert isinstance(x, Seq) and isinstance(x.left, Union)
    y = parse_program('p <- T cap ? p', W)
    assert relation_of(y, W) == relation_of(parse_program('(p <- T) ∩ (? p)', W), W)
    with pytest.raises(SourceError):
        parse_program('p <- X', W)


def test_model_example_one():
    model = parse_model(EXAMPLE1)
    F = model.structure
    assert isinstance(F, BeliefStructure)
    assert F.agents == ('A', 'B')
    pv, qv = F.vocab
    m = F.mgr
    assert F.omega['A'] == m.var(qv.at(1))
    assert F.omega['B'] == m.var(pv.at(1)) & m.var(qv).iff(m.var(qv.at(1)))
    assert model.state == {pv, qv}


def test_model_empty_obs_and_vacuous_law():
    model = parse_model('vocab p q\nlaw Bot\nobs a:\nobs b: p\n')
    F = model.structure
    assert isinstance(F, KnowledgeStructure)
    assert F.obs['a'] == frozenset()
    assert list(states_of(F)) == []


def test_model_errors():
    bad = [
        'vocab p\nobs a: p\nomega b: p\n',           # mixed kinds
        'vocab p\nlaw q\n',                          # undeclared atom
        "vocab p\nlaw p'\n",                         # primes in a law
        'vocab p\ntransformer X { vplus p\nthetaplus Top }\n',   # collision with V
        'vocab p\nstate p\nlaw ~p\n',                # state violates the law
        'law p\n',                                   # no vocabulary
    ]
    for text in bad:
        with pytest.raises(SourceError):
            parse_model(text)


def test_model_with_transformer():
    text = ('vocab p q\nlaw Top\nobs a: p\nobs b:\n'
            'transformer X {\n  vplus e\n  thetaplus e -> p\n  minus q: ~q\n'
            "  omegaplus a: e <-> e'\n}\n")
    model = parse_model(text)
    X = model.transformers['X']
    assert len(X.vplus) == 1 and X.modified == (model.vocab['q'],)
    phi = parse_formula('[X: {e}] K a q', model.vocab, transformers=model.transformers,
                        agents=model.agents)
    assert isinstance(phi, Apply) and phi.event.point == frozenset(X.vplus)
    with pytest.raises(SourceError):
        parse_formula('[X: {f}] p', model.vocab, transformers=model.transformers)
    with pytest.raises(SourceError):
        parse_formula('[Y: {}] p', model.vocab, transformers=model.transformers)


def test_model_round_trip():
    for text in (EXAMPLE1, 'vocab p q r\nlaw p -> q\nobs a: p\nobs b: q r\nstate q\n'):
        model = parse_model(text)
        again = parse_model(format_model(model))
        F, G = model.structure, again.structure
        assert type(F) is type(G) and F.agents == G.agents
        assert list(states_of(F)) == list(states_of(G))
        assert again.state == model.state
        if isinstance(F, BeliefStructure):
            both = [a.at(k) for a in F.vocab for k in (0, 1)]
            for i in F.agents:
                for s in states_over(both):
                    assert F.mgr.evaluate(F.omega[i], s) == G.mgr.evaluate(G.omega[i], s)
        else:
            assert F.obs == G.obs


def test_qdimacs_examples():
    psi = parse_qdimacs('p cnf 2 2\na 1 0\ne 2 0\n1 -2 0\n-1 2 0\n')
    assert psi.blocks == (('a', (1,)), ('e', (2,)))
    assert psi.clauses == ((1, -2), (-1, 2))
    assert qbf_eval(psi)
    assert qbf_eval(parse_qdimacs('p cnf 1 1\ne 1 0\n1 0\n'))
    with pytest.raises(SourceError, match='free'):
        parse_qdimacs('p cnf 1 1\n1 0\n')


def test_qdimacs_malformed():
    for text in ('a 1 0\n', 'p cnf x 1\n', 'p cnf 1 1\ne 1\n1 0\n', 'p cnf 1 1\ne 1 0\n1\n',
                 'p cnf 1 2\ne 1 0\n1 0\n', 'p cnf 1 1\ne 1 0\n1 0\ne 1 0\n'):
        with pytest.raises(SourceError):
            parse_qdimacs(text)


def test_qdimacs_round_trip_random():
    rng = random.Random(9)
    for _ in range(300):
        psi = random_qbf(rng)
        assert parse_qdimacs(format_qdimacs(psi)) == psi


def test_program_round_trip_random():
    W = Vocabulary.of('p q r')
    rng = random.Random(4)
    for _ in range(1000):
        prog = random_program(rng, list(W), 4)
        assert parse_program(format_program(prog, W), W) == prog


AGENTS = ['a', 'b']


def formulas():
    leaves = st.sampled_from([TOP, BOT, p, q, r])
    return st.recursive(leaves, lambda sub: st.one_of(
        st.builds(Not, sub),
        st.builds(And, sub, sub),
        st.builds(K, st.sampled_from(AGENTS), sub),
        st.builds(Announce, sub, sub),
    ), max_leaves=12)


@settings(max_examples=1000, deadline=None)
@given(formulas())
def test_formula_round_trip(f):
    text = format_formula(f, V)
    assert parse_formula(text, V, agents=AGENTS) == f


def test_formula_round_trip_with_events():
    model = parse_model('vocab p q\nlaw Top\nobs a: p\n'
                        'transformer X {\n vplus e d\n thetaplus e | K a d\n minus p: e & q\n}\n')
    X = model.transformers['X']
    e, d = X.vplus
    f = Apply(Event(X, frozenset({d})), K('a', Var(model.vocab['q'])))
    text = format_formula(f, X.vocab)
    assert parse_formula(text, model.vocab, transformers=model.transformers,
                         agents=model.agents) == f


def test_formula_without_vocab_allocates_names():
    from symdel.frontend import parse_formula_vocab
    f, vocab = parse_formula_vocab('K a (x & ~y)')
    assert [vocab.name(a) for a in vocab] == ['x', 'y']
    assert format_formula(f, vocab) == 'K a (x & ~y)'
