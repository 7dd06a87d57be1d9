"""Polynomial-space model checking.

`check` handles public announcements on knowledge structures and
`check_delk` handles transformers on belief structures.  Neither compiles
announcements or event laws into BDDs: the list of pending updates is
kept as syntax and the survival of a candidate state is re-derived by
recursive calls whenever a knowledge operator needs it.  The only BDD
operations performed are evaluations of the given state and observation
laws, which allocate nothing.
"""
from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

from .logic import (
    And, Announce, Apply, Bot, Event, Formula, K, LogicError, Not, State, Top,
    Var, bool_eval, has_events, states_over,
)
from .structures import (
    BeliefStructure, KnowledgeStructure, StructureError, Transformer,
    as_belief, eval_bdd_algo, is_state, naive_check, subst_point,
)

ALGORITHMS = ('pspace', 'bdd', 'naive')


@dataclass
class CheckStats:
    depth: int = 0
    valuations: int = 0
    peak_nodes: int = 0

    def __str__(self):
        return f'depth={self.depth} valuations={self.valuations} peak_nodes={self.peak_nodes}'

    def merge(self, other: CheckStats) -> None:
        self.depth = max(self.depth, other.depth)
        self.valuations += other.valuations
        self.peak_nodes = max(self.peak_nodes, other.peak_nodes)


class _Run:
    """Shared recursion bookkeeping for one top-level call."""

    def __init__(self, stats: CheckStats, reverse: bool, fixed: dict | None = None):
        self.stats = stats
        self.reverse = reverse
        self.level = 0
        # Restriction of the outermost knowledge loop, used to split work.
        self.fixed = fixed

    def enter(self):
        self.level += 1
        if self.level > self.stats.depth:
            self.stats.depth = self.level

    def leave(self):
        self.level -= 1

    def take_fixed(self) -> dict:
        f, self.fixed = self.fixed, None
        return f or {}


def _ensure_recursion(phi: Formula, extra: int = 0) -> None:
    need = 4 * (_size(phi) + extra) + 200
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)


def _size(phi: Formula) -> int:
    n, stack = 0, [phi]
    while stack:
        g = stack.pop()
        n += 1
        match g:
            case Not(a) | K(_, a) | Apply(_, a):
                stack.append(a)
            case And(a, b) | Announce(a, b):
                stack.extend((a, b))
    return n


# -- public announcements on knowledge structures ------------------------

def check(F: KnowledgeStructure, L: Sequence[Formula], s: State, phi: Formula,
          stats: CheckStats | None = None, reverse: bool = False) -> bool:
    """Truth of `phi` at `s` after announcing every formula in `L` in order."""
    if not isinstance(F, KnowledgeStructure):
        raise StructureError('check expects a knowledge structure')
    if not is_state(F, s):
        raise StructureError('precondition violated: the given set is not a state')
    if has_events(phi) or any(has_events(x) for x in L):
        raise StructureError('check handles announcements only; use check_delk for events')
    stats = stats if stats is not None else CheckStats()
    _ensure_recursion(phi, sum(_size(x) for x in L))
    before = len(F.mgr)
    r = _check(F, tuple(L), frozenset(s), phi, _Run(stats, reverse))
    stats.peak_nodes = max(stats.peak_nodes, len(F.mgr) - before)
    return r


def _check(F, L, s, phi, run: _Run) -> bool:
    run.enter()
    try:
        match phi:
            case Top():
                return True
            case Bot():
                return False
            case Var(a):
                return a in s
            case Not(a):
                return not _check(F, L, s, a, run)
            case And(a, b):
                return _check(F, L, s, a, run) and _check(F, L, s, b, run)
            case K(i, a):
                o = F.obs.get(i)
                if o is None:
                    raise StructureError(f'unknown agent {i!r}')
                env = {p: p in s for p in F.vocab if p in o}
                env.update(run.take_fixed())
                free = [p for p in F.vocab if p not in env]
                for t in F.mgr.sat_under(F.law, env, free, reverse=run.reverse):
                    run.stats.valuations += 1
                    t = t | {p for p, v in env.items() if v}
                    # did t survive every announcement so far?
                    if all(_check(F, L[:j], t, L[j], run) for j in range(len(L))):
                        if not _check(F, L, t, a, run):
                            return False
                return True
            case Announce(psi, xi):
                if _check(F, L, s, psi, run):
                    return _check(F, L + (psi,), s, xi, run)
                return True
        raise LogicError(f'check cannot handle {type(phi).__name__}')
    finally:
        run.leave()


# -- transformers on belief structures -----------------------------------

def _announcement(F: BeliefStructure, psi: Formula) -> Transformer:
    return Transformer('!', F.vocab, (), psi, (), {}, {})


def check_delk(F: BeliefStructure, L: Sequence[Event], s: State, phi: Formula,
               stats: CheckStats | None = None, reverse: bool = False) -> bool:
    """Truth of `phi` at `s` after executing the events of `L` in order."""
    if not isinstance(F, BeliefStructure):
        raise StructureError('check_delk expects a belief structure')
    if not is_state(F, s):
        raise StructureError('precondition violated: the given set is not a state')
    for ev in L:
        _validate_event(F, ev)
    stats = stats if stats is not None else CheckStats()
    _ensure_recursion(phi, 8 * len(L))
    before = len(F.mgr)
    r = _delk(F, tuple(L), frozenset(s), phi, _Run(stats, reverse))
    stats.peak_nodes = max(stats.peak_nodes, len(F.mgr) - before)
    return r


def _validate_event(F: BeliefStructure, ev: Event) -> None:
    X = ev.transformer
    if not set(ev.point) <= set(X.vplus):
        raise StructureError(f'{X.name}: event point is not a subset of its event atoms')
    if set(X.vplus) & set(F.vocab):
        raise StructureError(f'{X.name}: event atoms collide with the structure vocabulary')


def _advance(s: State, ev: Event) -> State:
    """V-part of the state after one event: replay the change law directly."""
    X, x = ev.transformer, ev.point
    if not X.modified:
        return s
    sx = s | x
    mod = set(X.modified)
    return frozenset({p for p in s if p not in mod}
                     | {q for q in X.modified if bool_eval(X.change_law[q], sx)})


def _final(s: State, L) -> State:
    for ev in L:
        s = _advance(s, ev)
    return s


def _delk(F: BeliefStructure, L: tuple, s: State, phi: Formula, run: _Run) -> bool:
    run.enter()
    try:
        match phi:
            case Top():
                return True
            case Bot():
                return False
            case Var(a):
                return a in _final(s, L)
            case Not(a):
                return not _delk(F, L, s, a, run)
            case And(a, b):
                return _delk(F, L, s, a, run) and _delk(F, L, s, b, run)
            case K(i, a):
                return _delk_knows(F, L, s, i, a, run)
            case Announce(psi, xi):
                ev = Event(_announcement(F, psi), frozenset())
                return _delk(F, L, s, Apply(ev, xi), run)
            case Apply(ev, xi):
                _validate_event(F, ev)
                X = ev.transformer
                # checking the precondition
                if _delk(F, L, s, subst_point(X.event_law, X.vplus, ev.point), run):
                    return _delk(F, L + (ev,), s, xi, run)
                return True
        raise LogicError(f'check_delk cannot handle {type(phi).__name__}')
    finally:
        run.leave()


def _delk_knows(F, L, s, i, psi, run: _Run) -> bool:
    omega = F.omega.get(i)
    if omega is None:
        raise StructureError(f'unknown agent {i!r}')
    mgr, V = F.mgr, F.vocab
    env = {p: p in s for p in V}
    fixed = run.take_fixed()
    env.update({p.at(1): v for p, v in fixed.items()})
    free = [p.at(1) for p in V if p.at(1) not in env]
    # actual post-event V-states, one per prefix of L
    s_after = [s]
    for ev in L:
        s_after.append(_advance(s_after[-1], ev))
    for tp in mgr.sat_under(omega, env, free, reverse=run.reverse):
        tp = tp | {p for p, v in env.items() if v and p.prime == 1}
        t = frozenset(p.at(0) for p in tp)
        run.stats.valuations += 1
        if not mgr.evaluate(F.law, t):
            continue
        for points in _event_points(F, L, s_after, t, i, 0, [], run):
            if not _delk(F, tuple(Event(ev.transformer, y) for ev, y in zip(L, points)),
                         t, psi, run):
                return False
    return True


def _event_points(F, L, s_after, t, i, j, chosen, run: _Run) -> Iterator[list]:
    """Event points t_0..t_k making `t` an accessible survivor, one at a time.

    Point y is accepted at position j when x_j with the primed y satisfies
    agent i's event observation law (state atoms read after event j, the
    candidate's primed) and `t` survives X_j's event law given the points
    chosen so far.
    """
    if j == len(L):
        yield chosen
        return
    mgr = F.mgr
    ev = L[j]
    X, x = ev.transformer, ev.point
    prefix = tuple(Event(e.transformer, y) for e, y in zip(L[:j], chosen))
    t_now = _final(t, prefix)
    w = X.omega_for(i, mgr)
    actual = s_after[j + 1] | x
    points = states_over(X.vplus)
    if run.reverse:
        points = reversed(list(points))
    for y in points:
        run.stats.valuations += 1
        t_next = _advance(t_now, Event(X, y))
        if not mgr.evaluate(w, actual | {a.at(1) for a in t_next | y}):
            continue
        if not _delk(F, prefix, t, subst_point(X.event_law, X.vplus, y), run):
            continue
        chosen.append(y)
        yield from _event_points(F, L, s_after, t, i, j + 1, chosen, run)
        chosen.pop()


# -- dispatch --------------------------------------------------------------

def model_check(model, state: State, formula: Formula, algo: str = 'pspace', *,
                reverse: bool = False, jobs: int = 1) -> tuple[bool, CheckStats]:
    """Evaluate with the chosen algorithm and report instrumentation."""
    if algo not in ALGORITHMS:
        raise ValueError(f'unknown algorithm {algo!r}; expected one of {", ".join(ALGORITHMS)}')
    if not is_state(model, state):
        raise StructureError('the given set is not a state of the model')
    state = frozenset(state)
    stats = CheckStats()
    if algo == 'bdd':
        return eval_bdd_algo(model, state, formula, stats), stats
    if algo == 'naive':
        before = len(model.mgr)
        r = naive_check(model, state, formula)
        stats.peak_nodes = len(model.mgr) - before
        return r, stats
    F, run = _route(model, formula)
    if jobs > 1:
        return _parallel(F, state, formula, reverse, jobs, stats), stats
    return run(F, (), state, formula, stats, reverse), stats


def _route(model, formula):
    if isinstance(model, KnowledgeStructure) and not has_events(formula):
        return model, check
    return as_belief(model), check_delk


def _parallel(F, s, phi, reverse, jobs, stats) -> bool:
    """Split the outermost knowledge loop into slices run in worker processes."""
    negations = 0
    core = phi
    while isinstance(core, Not):
        negations += 1
        core = core.arg
    if not isinstance(core, K):
        _, run = _route(F, phi)
        return run(F, (), s, phi, stats, reverse)
    if isinstance(F, KnowledgeStructure):
        o = F.obs.get(core.agent, frozenset())
        split = [p for p in F.vocab if p not in o]
    else:
        split = list(F.vocab)
    width = min(len(split), max(1, (jobs - 1).bit_length() + 1))
    slices = [dict(zip(split[:width], bits)) for bits in _bit_rows(width)]
    value = True
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_slice_worker, F, s, core, fx, reverse) for fx in slices]
        for fut in futures:
            ok, st = fut.result()
            stats.merge(st)
            if not ok:
                value = False
                for other in futures:
                    other.cancel()
                break
    return value if negations % 2 == 0 else not value


def _bit_rows(width: int):
    for n in range(1 << width):
        yield tuple(bool(n >> (width - 1 - k) & 1) for k in range(width))


def _slice_worker(F, s, core: K, fixed: dict, reverse: bool):
    stats = CheckStats()
    _ensure_recursion(core)
    if isinstance(F, KnowledgeStructure):
        run = _Run(stats, reverse, fixed)
        r = _check(F, (), s, core, run)
    else:
        run = _Run(stats, reverse, {p.at(1): v for p, v in fixed.items()})
        r = _delk(F, (), s, core, run)
    return r, stats


# -- the reduction-axiom alternative --------------------------------------

def announcement_tower(agent: str, p, depth: int) -> Formula:
    """[![!...[!K p]K p...]K p]K p with `depth` announcements (depth 0 is K p)."""
    kp = K(agent, Var(p))
    f = kp
    for _ in range(depth):
        f = Announce(f, kp)
    return f


def reduce_announcements(phi: Formula) -> Formula:
    """Eliminate public announcements with the standard reduction axioms.

    The result shares subterms, so it is cheap to build, but its length
    as a tree can be exponential in the input length.
    """
    memo: dict[int, Formula] = {}

    def red(f):
        r = memo.get(id(f))
        if r is None:
            match f:
                case Not(a):
                    r = Not(red(a))
                case And(a, b):
                    r = And(red(a), red(b))
                case K(i, a):
                    r = K(i, red(a))
                case Announce(psi, xi):
                    r = _push(red(psi), red(xi), {})
                case Apply():
                    raise LogicError('reduction axioms are implemented for announcements only')
                case _:
                    r = f
            memo[id(f)] = r
        return r

    return red(phi)


def _push(psi: Formula, f: Formula, memo: dict) -> Formula:
    r = memo.get(id(f))
    if r is None:
        match f:
            case Not(a):
                r = Not(And(psi, Not(Not(_push(psi, a, memo)))))
            case And(a, b):
                r = And(_push(psi, a, memo), _push(psi, b, memo))
            case K(i, a):
                r = Not(And(psi, Not(K(i, _push(psi, a, memo)))))
            case _:
                r = Not(And(psi, Not(f)))
        memo[id(f)] = r
    return r


def tree_length(phi: Formula) -> int:
    """Formula length counting shared subterms once per occurrence."""
    memo: dict[int, int] = {}

    def ln(f):
        r = memo.get(id(f))
        if r is None:
            match f:
                case Not(a) | K(_, a):
                    r = ln(a) + 1
                case And(a, b) | Announce(a, b):
                    r = ln(a) + ln(b) + 1
                case Apply(ev, a):
                    r = ev.transformer.size() + ln(a) + 1
                case _:
                    r = 1
            memo[id(f)] = r
        return r

    return ln(phi)
