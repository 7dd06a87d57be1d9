"""Text formats: formulas, structure files (.epi), mental programs (.mp), QDIMACS.

All parsers are hand-written recursive descent over one shared lexer and
report errors as `SourceError` with a byte offset, line and column.
Serializers print core syntax only, so parse(format(x)) == x.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .bdd import Atom, Bdd, Manager
from .logic import (
    BOT, TOP, And, Announce, Apply, Bot, Event, Formula, K, LogicError, Not,
    State, Top, Var, Vocabulary, agents_of, bdd_to_formula,
    compile_bool, disj, iff, imp, is_boolean,
)
from .programs import Assign, Inter, Program, Seq, Test, Union
from .kripke import EXISTS, FORALL, PrenexQBF
from .structures import (
    BeliefStructure, KnowledgeStructure, StructureError, Transformer,
)


class SourceError(Exception):
    def __init__(self, message: str, text: str, offset: int, expected: str = ''):
        offset = max(0, min(offset, len(text)))
        self.offset = offset
        self.line = text.count('\n', 0, offset) + 1
        self.col = offset - (text.rfind('\n', 0, offset) + 1) + 1
        self.expected = expected
        self.message = message
        super().__init__(f'{self.line}:{self.col}: {message}')


# -- lexer ------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Token:
    kind: str    # 'ident', 'op', 'sep', 'eof'
    text: str
    offset: int


_OPS = ('<->', '->', '<-', '&', '|', '~', '(', ')', '[', ']', '!', ':', '{', '}',
        ',', '?', ';')
_UNICODE = {'¬': '~', '∧': '&', '∨': '|', '→': '->', '↔': '<->', '←': '<-',
            '∩': 'cap', '∪': 'U', '⊤': 'Top', '⊥': 'Bot'}
_WORDS = {'Top', 'Bot', 'T', 'F', 'U', 'cap'}


def tokenize(text: str) -> list[Token]:
    """Newlines are separators except inside parentheses or brackets."""
    out: list[Token] = []
    i, n, depth = 0, len(text), 0
    while i < n:
        c = text[i]
        if c == '#':
            while i < n and text[i] != '\n':
                i += 1
            continue
        if c == '\n':
            if depth == 0:
                out.append(Token('sep', '\n', i))
            i += 1
            continue
        if c.isspace():
            i += 1
            continue
        if c.isalnum() or c == '_':
            j = i
            while j < n and (text[j].isalnum() or text[j] == '_'):
                j += 1
            while j < n and text[j] == "'":
                j += 1
            out.append(Token('ident', text[i:j], i))
            i = j
            continue
        if c in _UNICODE:
            u = _UNICODE[c]
            out.append(Token('ident' if u in _WORDS else 'op', u, i))
            i += 1
            continue
        for op in _OPS:
            if text.startswith(op, i):
                if op in '([':
                    depth += 1
                elif op in ')]':
                    depth = max(0, depth - 1)
                out.append(Token('sep' if op == ';' else 'op', op, i))
                i += len(op)
                break
        else:
            raise SourceError(f'unexpected character {c!r}', text, i, 'a token')
    out.append(Token('eof', '', n))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != 'eof':
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ('op', 'ident', 'sep') and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str, what: str | None = None) -> Token:
        if not self.at(text):
            self.fail(what or repr(text))
        return self.advance()

    def ident(self, what: str = 'an identifier') -> Token:
        if self.tok.kind != 'ident':
            self.fail(what)
        return self.advance()

    def fail(self, expected: str, tok: Token | None = None, message: str | None = None):
        tok = tok or self.tok
        found = 'end of input' if tok.kind == 'eof' else (
            'end of line' if tok.text == '\n' else repr(tok.text))
        raise SourceError(message or f'expected {expected}, found {found}',
                          self.text, tok.offset, expected)

    def skip_seps(self):
        while self.tok.kind == 'sep':
            self.advance()

    def end_statement(self):
        if self.tok.kind == 'sep':
            self.advance()
        elif not (self.tok.kind == 'eof' or self.at('}')):
            self.fail('end of statement')

    # -- formulas --

    def formula(self, ctx: _Ctx) -> Formula:
        f = self.implication(ctx)
        while self.accept('<->'):
            f = iff(f, self.implication(ctx))
        return f

    def implication(self, ctx) -> Formula:
        f = self.disjunction(ctx)
        if self.accept('->'):
            return imp(f, self.implication(ctx))
        return f

    def disjunction(self, ctx) -> Formula:
        f = self.conjunction(ctx)
        while self.accept('|'):
            f = disj(f, self.conjunction(ctx))
        return f

    def conjunction(self, ctx) -> Formula:
        f = self.unary(ctx)
        while self.accept('&'):
            f = And(f, self.unary(ctx))
        return f

    def unary(self, ctx) -> Formula:
        t = self.tok
        if self.accept('~'):
            return Not(self.unary(ctx))
        if t.kind == 'ident' and t.text in ('K', 'Khat'):
            self.advance()
            agent = ctx.agent(self, self.ident('an agent name'))
            arg = self.unary(ctx)
            return K(agent, arg) if t.text == 'K' else Not(K(agent, Not(arg)))
        if self.at('['):
            self.advance()
            if self.accept('!'):
                ann = self.formula(ctx)
                self.expect(']')
                return Announce(ann, self.unary(ctx))
            name = self.ident("'!' or a transformer name")
            X = ctx.transformer(self, name)
            self.expect(':')
            point = self.event_point(ctx, X)
            self.expect(']')
            return Apply(Event(X, point), self.unary(ctx))
        return self.atomic(ctx)

    def event_point(self, ctx, X: Transformer) -> frozenset:
        self.expect('{')
        names: list[Token] = []
        if not self.at('}'):
            names.append(self.ident('an event atom'))
            while self.accept(','):
                names.append(self.ident('an event atom'))
        self.expect('}')
        point = set()
        for tk in names:
            a = ctx.event_atom(self, tk, X)
            point.add(a)
        return frozenset(point)

    def atomic(self, ctx) -> Formula:
        t = self.tok
        if self.accept('('):
            f = self.formula(ctx)
            self.expect(')')
            return f
        if t.kind == 'ident':
            if t.text == 'Top':
                self.advance()
                return TOP
            if t.text == 'Bot':
                self.advance()
                return BOT
            if t.text not in _RESERVED:
                self.advance()
                return Var(ctx.atom(self, t))
        self.fail('a formula')

    # -- programs --

    def program(self, ctx) -> Program:
        p = self.program_par(ctx)
        while self.at(';'):
            self.advance()
            self.skip_newlines()
            p = Seq(p, self.program_par(ctx))
        return p

    def skip_newlines(self):
        while self.tok.kind == 'sep' and self.tok.text == '\n':
            self.advance()

    def program_par(self, ctx) -> Program:
        p = self.program_atom(ctx)
        while self.at('U') or self.at('cap'):
            op = self.advance().text
            q = self.program_atom(ctx)
            p = Union(p, q) if op == 'U' else Inter(p, q)
        return p

    def program_atom(self, ctx) -> Program:
        t = self.tok
        if self.accept('('):
            p = self.program(ctx)
            self.expect(')')
            return p
        if self.accept('?'):
            start = self.tok
            f = self.formula(ctx)
            if not is_boolean(f):
                self.fail('a Boolean formula', start, 'tests take Boolean formulas only')
            return Test(f)
        if t.kind == 'ident' and t.text not in _RESERVED:
            self.advance()
            a = ctx.atom(self, t)
            self.expect('<-')
            v = self.tok
            if v.kind == 'ident' and v.text in ('T', 'Top'):
                self.advance()
                return Assign(a, True)
            if v.kind == 'ident' and v.text in ('F', 'Bot'):
                self.advance()
                return Assign(a, False)
            self.fail("'T' or 'F'")
        self.fail("an assignment, a test '?', or '('")


_RESERVED = {'K', 'Khat', 'Top', 'Bot', 'U', 'cap', 'T', 'F'}


class _Ctx:
    """Name resolution for one parse: atoms, agents, transformers."""

    def __init__(self, vocab: Vocabulary | None, *, primes: int = 0,
                 allowed: set[Atom] | None = None, agents: Iterable[str] | None = None,
                 transformers: Mapping[str, Transformer] | None = None):
        self.vocab = vocab
        self.fresh: list[str] = []       # names allocated when no vocabulary is given
        self.primes = primes
        self.allowed = allowed
        self.agents = None if agents is None else set(agents)
        self.transformers = transformers or {}

    def atom(self, p: _Parser, tok: Token) -> Atom:
        name = tok.text
        prime = len(name) - len(name.rstrip("'"))
        base = name[:len(name) - prime]
        if prime > self.primes:
            p.fail('an atom', tok, f'primed atom {name!r} is not allowed here'
                   if self.primes == 0 else f'atom {name!r} has too many primes')
        if self.vocab is None:
            if base not in self.fresh:
                try:
                    Vocabulary([base])
                except LogicError as e:
                    p.fail('an atom', tok, str(e))
                self.fresh.append(base)
            return Atom(self.fresh.index(base), prime)
        try:
            a = self.vocab.atom(name)
        except LogicError:
            p.fail('an atom', tok, f'undeclared atom {base!r}')
        allowed = self.allowed if self.allowed is not None else set(self.vocab)
        if a.at(0) not in allowed:
            p.fail('an atom', tok, f'atom {base!r} is not allowed here')
        return a

    def agent(self, p: _Parser, tok: Token) -> str:
        if self.agents is not None and tok.text not in self.agents:
            p.fail('an agent name', tok, f'undeclared agent {tok.text!r}')
        return tok.text

    def transformer(self, p: _Parser, tok: Token) -> Transformer:
        X = self.transformers.get(tok.text)
        if X is None:
            p.fail('a transformer name', tok, f'undeclared transformer {tok.text!r}')
        return X

    def event_atom(self, p: _Parser, tok: Token, X: Transformer) -> Atom:
        for e in X.vplus:
            if X.vocab.name(e) == tok.text:
                return e
        p.fail('an event atom', tok, f'{tok.text!r} is not an event atom of {X.name}')


def _finish(p: _Parser, what: str):
    p.skip_seps()
    if p.tok.kind != 'eof':
        p.fail(f'end of {what}')


def parse_formula(text: str, vocab: Vocabulary | None = None, *,
                  transformers: Mapping[str, Transformer] | None = None,
                  agents: Iterable[str] | None = None) -> Formula:
    """Parse a formula; without `vocab`, atoms are numbered by first appearance."""
    return parse_formula_vocab(text, vocab, transformers=transformers, agents=agents)[0]


def parse_formula_vocab(text: str, vocab: Vocabulary | None = None, *,
                        transformers=None, agents=None) -> tuple[Formula, Vocabulary]:
    p = _Parser(text)
    ctx = _Ctx(vocab, agents=agents, transformers=transformers)
    p.skip_seps()
    f = p.formula(ctx)
    _finish(p, 'formula')
    return f, (vocab if vocab is not None else Vocabulary(ctx.fresh))


def parse_bool(text: str, vocab: Vocabulary, primes: int = 0) -> Formula:
    p = _Parser(text)
    p.skip_seps()
    start = p.tok
    f = p.formula(_Ctx(vocab, primes=primes))
    _finish(p, 'formula')
    if not is_boolean(f):
        p.fail('a Boolean formula', start, 'expected a Boolean formula')
    return f


def parse_program(text: str, vocab: Vocabulary | None = None) -> Program:
    return parse_program_vocab(text, vocab)[0]


def parse_program_vocab(text: str, vocab: Vocabulary | None = None) -> tuple[Program, Vocabulary]:
    p = _Parser(text)
    ctx = _Ctx(vocab)
    p.skip_seps()
    prog = p.program(ctx)
    _finish(p, 'program')
    return prog, (vocab if vocab is not None else Vocabulary(ctx.fresh))


# -- structure files ---------------------------------------------------------

@dataclass
class Model:
    structure: KnowledgeStructure | BeliefStructure
    transformers: dict[str, Transformer] = field(default_factory=dict)
    state: State | None = None

    @property
    def vocab(self) -> Vocabulary:
        return self.structure.vocab

    @property
    def agents(self) -> tuple[str, ...]:
        return self.structure.agents


def parse_model(text: str, mgr: Manager | None = None) -> Model:
    p = _Parser(text)
    mgr = mgr or Manager()
    vocab: Vocabulary | None = None
    table: Vocabulary | None = None      # latest name table (grows with event atoms)
    law: Formula = TOP
    law_tok = None
    agents: list[str] = []
    obs: dict[str, frozenset] = {}
    omega: dict[str, Bdd] = {}
    kind = None
    state_tok, state_names = None, None
    transformers: dict[str, Transformer] = {}
    pending_agent_checks: list[tuple[Token, str]] = []

    def need_vocab(tok):
        if vocab is None:
            p.fail("'vocab' first", tok, "the 'vocab' statement must come first")

    def add_agent(name):
        if name not in agents:
            agents.append(name)

    def set_kind(k, tok):
        nonlocal kind
        if kind is not None and kind != k:
            p.fail('a consistent structure kind', tok,
                   "cannot mix 'obs' (knowledge) and 'omega' (belief) statements")
        kind = k

    while True:
        p.skip_seps()
        tok = p.tok
        if tok.kind == 'eof':
            break
        word = p.ident('a statement keyword').text
        if word == 'vocab':
            if vocab is not None:
                p.fail('a single vocab statement', tok, "duplicate 'vocab' statement")
            names = []
            while p.tok.kind == 'ident':
                names.append(p.advance())
            try:
                vocab = Vocabulary([t.text for t in names])
            except LogicError as e:
                p.fail('proposition names', names[0] if names else tok, str(e))
            vocab.declare(mgr)
            table = vocab
        elif word == 'law':
            need_vocab(tok)
            law_tok = p.tok
            law = p.formula(_Ctx(vocab))
            if not is_boolean(law):
                p.fail('a Boolean formula', law_tok, 'the state law must be Boolean')
        elif word == 'agents':
            while p.tok.kind == 'ident':
                add_agent(p.advance().text)
        elif word == 'obs':
            need_vocab(tok)
            set_kind('obs', tok)
            a = p.ident('an agent name')
            p.expect(':')
            if a.text in obs:
                p.fail('a new agent', a, f'duplicate observables for {a.text!r}')
            seen = set()
            while p.tok.kind == 'ident':
                t = p.advance()
                seen.add(_Ctx(vocab).atom(p, t))
            add_agent(a.text)
            obs[a.text] = frozenset(seen)
        elif word == 'omega':
            need_vocab(tok)
            set_kind('omega', tok)
            a = p.ident('an agent name')
            p.expect(':')
            if a.text in omega:
                p.fail('a new agent', a, f'duplicate observation law for {a.text!r}')
            start = p.tok
            f = p.formula(_Ctx(vocab, primes=1))
            if not is_boolean(f):
                p.fail('a Boolean formula', start, 'observation laws must be Boolean')
            add_agent(a.text)
            omega[a.text] = compile_bool(f, mgr)
        elif word == 'state':
            need_vocab(tok)
            state_tok = tok
            state_names = []
            while p.tok.kind == 'ident':
                state_names.append(_Ctx(vocab).atom(p, p.advance()))
        elif word == 'transformer':
            need_vocab(tok)
            name = p.ident('a transformer name')
            if name.text in transformers:
                p.fail('a new transformer name', name, f'duplicate transformer {name.text!r}')
            table, X = _parse_transformer(p, name.text, vocab, table, mgr, transformers,
                                          pending_agent_checks)
            transformers[name.text] = X
        else:
            p.fail('a statement keyword', tok, f'unknown statement {word!r}')
        p.end_statement()

    if vocab is None:
        p.fail("a 'vocab' statement", p.tok)
    vocab = Vocabulary(_table=table.table, _atoms=vocab.atoms)
    for tk, ag in pending_agent_checks:
        if ag not in agents:
            p.fail('an agent name', tk, f'undeclared agent {ag!r}')
    law_bdd = compile_bool(law, mgr)
    if kind == 'omega':
        full = {a: omega.get(a, mgr.true) for a in agents}
        F = BeliefStructure(vocab, law_bdd, full)
    else:
        full = {a: obs.get(a, frozenset()) for a in agents}
        F = KnowledgeStructure(vocab, law_bdd, full)
    for X in transformers.values():
        X.vocab = vocab
        for tk_agent in X.omega_plus:
            if tk_agent not in agents:
                raise SourceError(f'undeclared agent {tk_agent!r} in transformer {X.name}',
                                  text, 0, 'an agent name')
    state = None
    if state_names is not None:
        state = frozenset(state_names)
        if not mgr.evaluate(law_bdd, state):
            p.fail('a state satisfying the law', state_tok,
                   'the designated state violates the state law')
    return Model(F, transformers, state)


def _parse_transformer(p: _Parser, name: str, vocab: Vocabulary, table: Vocabulary,
                       mgr: Manager, known: Mapping[str, Transformer], agent_checks):
    p.skip_newlines()
    p.expect('{')
    vplus: list[Token] = []
    body: list[tuple[str, Token, object]] = []
    while True:
        p.skip_seps()
        if p.accept('}'):
            break
        kw = p.ident("'vplus', 'thetaplus', 'minus', 'omegaplus' or '}'")
        if kw.text == 'vplus':
            if vplus:
                p.fail('a single vplus statement', kw, "duplicate 'vplus' statement")
            while p.tok.kind == 'ident':
                vplus.append(p.advance())
            # Register immediately so later statements can mention the event atoms.
            try:
                table, fresh = table.with_events([t.text for t in vplus])
            except LogicError as e:
                p.fail('fresh event atom names', vplus[0] if vplus else kw, str(e))
            vocab.declare(mgr, fresh)
            body.append(('vplus', kw, fresh))
        elif kw.text in ('thetaplus', 'minus', 'omegaplus'):
            fresh = next((v for k, _, v in body if k == 'vplus'), ())
            allowed = set(vocab) | set(fresh)
            scope = Vocabulary(_table=table.table, _atoms=vocab.atoms)
            if kw.text == 'thetaplus':
                f = p.formula(_Ctx(scope, allowed=allowed, transformers=known))
                for ag in agents_of(f):
                    agent_checks.append((kw, ag))
                body.append(('thetaplus', kw, f))
            else:
                head = p.ident('an atom' if kw.text == 'minus' else 'an agent name')
                p.expect(':')
                start = p.tok
                f = p.formula(_Ctx(scope, allowed=allowed,
                                   primes=0 if kw.text == 'minus' else 1))
                if not is_boolean(f):
                    p.fail('a Boolean formula', start, f'{kw.text} takes a Boolean formula')
                if kw.text == 'minus':
                    q = _Ctx(vocab).atom(p, head)
                    body.append(('minus', head, (q, f)))
                else:
                    body.append(('omegaplus', head, (head.text, compile_bool(f, mgr))))
        else:
            p.fail("'vplus', 'thetaplus', 'minus', 'omegaplus' or '}'", kw)
        p.end_statement()
    fresh = next((v for k, _, v in body if k == 'vplus'), ())
    event_law = TOP
    change: dict[Atom, Formula] = {}
    omegas: dict[str, Bdd] = {}
    for k, tk, v in body:
        if k == 'thetaplus':
            event_law = v
        elif k == 'minus':
            q, f = v
            if q in change:
                p.fail('a new modified atom', tk, f'duplicate change law for {tk.text!r}')
            change[q] = f
        elif k == 'omegaplus':
            ag, b = v
            if ag in omegas:
                p.fail('a new agent', tk, f'duplicate event observation law for {ag!r}')
            omegas[ag] = b
    try:
        X = Transformer(name, Vocabulary(_table=table.table, _atoms=vocab.atoms),
                        tuple(fresh), event_law, tuple(change), change, omegas)
    except StructureError as e:
        raise SourceError(str(e), p.text, p.tok.offset) from None
    return table, X


# -- QDIMACS -------------------------------------------------------------------

def parse_qdimacs(text: str) -> PrenexQBF:
    header = None
    blocks: list[tuple[str, tuple[int, ...]]] = []
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    offset = 0
    for line in text.splitlines(keepends=True):
        here = offset
        offset += len(line)
        s = line.strip()
        if not s or s.startswith('c'):
            continue
        fields = s.split()
        if fields[0] == 'p':
            if header is not None:
                raise SourceError('duplicate problem line', text, here, 'clauses')
            if len(fields) != 4 or fields[1] != 'cnf':
                raise SourceError("malformed header; expected 'p cnf <vars> <clauses>'",
                                  text, here, 'p cnf <vars> <clauses>')
            try:
                header = (int(fields[2]), int(fields[3]))
            except ValueError:
                raise SourceError('header counts must be integers', text, here,
                                  'integers') from None
            if min(header) < 0:
                raise SourceError('header counts must be nonnegative', text, here, 'integers')
            continue
        if header is None:
            raise SourceError("missing 'p cnf' header", text, here, 'p cnf <vars> <clauses>')
        if fields[0] in (FORALL, EXISTS):
            if clauses or current:
                raise SourceError('quantifier line after clauses', text, here, 'a clause')
            nums = _ints(fields[1:], text, here)
            if not nums or nums[-1] != 0 or 0 in nums[:-1]:
                raise SourceError('quantifier line must end with a single 0', text, here,
                                  'a 0-terminated quantifier line')
            blocks.append((fields[0], tuple(nums[:-1])))
            continue
        for v in _ints(fields, text, here):
            if v == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(v)
    if header is None:
        raise SourceError("missing 'p cnf' header", text, len(text), 'p cnf <vars> <clauses>')
    if current:
        raise SourceError('last clause is not terminated by 0', text, len(text), '0')
    nvars, ncl = header
    if len(clauses) != ncl:
        raise SourceError(f'header announces {ncl} clauses, found {len(clauses)}',
                          text, len(text), f'{ncl} clauses')
    try:
        return PrenexQBF(nvars, tuple(blocks), tuple(clauses))
    except ValueError as e:
        raise SourceError(str(e), text, 0, 'a closed prenex QBF') from None


def _ints(fields, text, here) -> list[int]:
    try:
        return [int(x) for x in fields]
    except ValueError:
        raise SourceError('expected integers', text, here, 'integers') from None


def format_qdimacs(psi: PrenexQBF) -> str:
    lines = [f'p cnf {psi.nvars} {len(psi.clauses)}']
    lines += [f'{kind} {" ".join(map(str, vs))} 0'.replace('  ', ' ') for kind, vs in psi.blocks]
    lines += [' '.join(map(str, c + (0,))) for c in psi.clauses]
    return '\n'.join(lines) + '\n'


# -- serializers -----------------------------------------------------------------

Namer = Callable[[Atom], str]


def format_formula(f: Formula, namer: Namer | Vocabulary) -> str:
    """Core syntax with minimal parentheses."""
    name = namer.name if isinstance(namer, Vocabulary) else namer

    def un(g) -> str:
        if isinstance(g, And):
            return '(' + fm(g) + ')'
        return fm(g)

    def fm(g) -> str:
        match g:
            case Top():
                return 'Top'
            case Bot():
                return 'Bot'
            case Var(a):
                return name(a)
            case Not(a):
                return '~' + un(a)
            case And(a, b):
                return fm(a) + ' & ' + un(b)
            case K(i, a):
                return f'K {i} ' + un(a)
            case Announce(a, b):
                return f'[! {fm(a)}] ' + un(b)
            case Apply(ev, b):
                X = ev.transformer
                pts = ', '.join(X.vocab.name(e) for e in X.vplus if e in ev.point)
                return f'[{X.name}:{{{pts}}}] ' + un(b)
        raise LogicError(f'cannot format {g!r}')

    return fm(f)


def format_program(pi: Program, namer: Namer | Vocabulary) -> str:
    name = namer.name if isinstance(namer, Vocabulary) else namer

    def test(c) -> str:
        return '? ' + format_formula(c, name)

    def atom(q) -> str:
        match q:
            case Assign(a, v):
                return f'{name(a)} <- {"T" if v else "F"}'
            case Test(c):
                return test(c)
        return '(' + fp(q) + ')'

    def par(q) -> str:
        match q:
            case Union(a, b):
                return par(a) + ' U ' + atom(b)
            case Inter(a, b):
                return par(a) + ' cap ' + atom(b)
        return atom(q)

    def fp(q) -> str:
        if isinstance(q, Seq):
            return fp(q.left) + ' ; ' + par(q.right)
        return par(q)

    return fp(pi)


def format_model(model: Model | KnowledgeStructure | BeliefStructure,
                 transformers: Mapping[str, Transformer] | None = None,
                 state: State | None = None) -> str:
    if isinstance(model, Model):
        F, transformers, state = model.structure, model.transformers, model.state
    else:
        F = model
        transformers = transformers or {}
    V = F.vocab
    if any(a.frozen or a.prov != 0 for a in V):
        raise StructureError('only structures over original atoms can be written out')

    def bf(b: Bdd) -> str:
        return format_formula(bdd_to_formula(b), V.name)

    lines = ['vocab ' + ' '.join(V.name(a) for a in V).rstrip()]
    lines.append('law ' + bf(F.law))
    if F.agents:
        lines.append('agents ' + ' '.join(F.agents))
    if isinstance(F, KnowledgeStructure):
        for i, o in F.obs.items():
            lines.append(f'obs {i}: ' + ' '.join(V.name(a) for a in V if a in o))
    else:
        for i, w in F.omega.items():
            lines.append(f'omega {i}: ' + bf(w))
    if state is not None:
        lines.append('state ' + ' '.join(V.name(a) for a in V if a in state))
    for name, X in transformers.items():
        names = X.vocab.name
        lines.append(f'transformer {name} {{')
        if X.vplus:
            lines.append('  vplus ' + ' '.join(names(e) for e in X.vplus))
        lines.append('  thetaplus ' + format_formula(X.event_law, names))
        for q in X.modified:
            lines.append(f'  minus {names(q)}: ' + format_formula(X.change_law[q], names))
        for i, w in X.omega_plus.items():
            lines.append(f'  omegaplus {i}: ' + format_formula(bdd_to_formula(w), names))
        lines.append('}')
    return '\n'.join(line.rstrip() for line in lines) + '\n'
