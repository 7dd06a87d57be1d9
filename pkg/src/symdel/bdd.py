"""Reduced ordered binary decision diagrams over tagged atoms.

A `Manager` is an arena of hash-consed nodes plus a fixed variable
order.  Nodes are small integers; `0` is the false terminal and `1` the
true terminal.  Public operations take and return `Bdd` handles, which
remember their manager so that mixing diagrams from two managers is
caught instead of silently producing garbage.

There are no complement edges, no garbage collection and no dynamic
reordering: node counts are exactly those of the plain two-terminal
ROBDD under the order given at declaration time.
"""
from __future__ import annotations

from typing import Callable, Iterable, Iterator, Mapping, NamedTuple

ORIGINAL = 0
EVENT = -1

AND, OR, XOR, IMPLIES, IFF = range(5)
_OPS = {'and': AND, 'or': OR, 'xor': XOR, 'implies': IMPLIES, 'iff': IFF}
_TABLE = {
    AND: lambda a, b: a & b,
    OR: lambda a, b: a | b,
    XOR: lambda a, b: a ^ b,
    IMPLIES: lambda a, b: (1 - a) | b,
    IFF: lambda a, b: 1 - (a ^ b),
}
_COMMUTATIVE = {AND, OR, XOR, IFF}
_TERMINAL_LEVEL = 1 << 30


class BDDError(Exception):
    """Misuse of a manager: unranked atoms, foreign operands, bad maps."""


class Atom(NamedTuple):
    """A propositional variable.

    `base` indexes a vocabulary's name table, `prime` is 0, 1 or 2
    (p, p', p''), and `prov` is `ORIGINAL`, `EVENT` or a positive
    generation number for frozen copies of modified atoms.
    """
    base: int
    prime: int = 0
    prov: int = ORIGINAL

    def at(self, prime: int) -> Atom:
        return Atom(self.base, prime, self.prov)

    @property
    def frozen(self) -> bool:
        return self.prov > 0

    def __str__(self):
        tag = {ORIGINAL: '', EVENT: '+'}.get(self.prov, f'°{self.prov}')
        return f'v{self.base}{tag}' + "'" * self.prime


class Bdd:
    """Handle to a node owned by a `Manager`."""

    __slots__ = ('mgr', 'node')

    def __init__(self, mgr: Manager, node: int):
        self.mgr = mgr
        self.node = node

    def __eq__(self, other):
        return (isinstance(other, Bdd) and other.mgr is self.mgr
                and other.node == self.node)

    def __hash__(self):
        return hash((id(self.mgr), self.node))

    def __repr__(self):
        if self.node < 2:
            return f'Bdd({"TF"[1 - self.node]})'
        return f'Bdd(node={self.node}, size={self.mgr.node_count(self)})'

    def __invert__(self):
        return self.mgr.negate(self)

    def __and__(self, other):
        return self.mgr.apply('and', self, other)

    def __or__(self, other):
        return self.mgr.apply('or', self, other)

    def __xor__(self, other):
        return self.mgr.apply('xor', self, other)

    def implies(self, other):
        return self.mgr.apply('implies', self, other)

    def iff(self, other):
        return self.mgr.apply('iff', self, other)

    @property
    def is_true(self) -> bool:
        return self.node == 1

    @property
    def is_false(self) -> bool:
        return self.node == 0


class Manager:
    """Shared ROBDD arena with a unique table and an operation cache.

    The variable order is the declaration order; `declare` appends.
    A manager is single-writer: callers serialize access to one manager.
    """

    def __init__(self, order: Iterable[Atom] = ()):
        self._atoms: list[Atom] = []
        self._rank: dict[Atom, int] = {}
        self._level = [_TERMINAL_LEVEL, _TERMINAL_LEVEL]
        self._lo = [0, 1]
        self._hi = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._cache: dict[tuple, int] = {}
        self._not: dict[int, int] = {}
        self._size: dict[int, int] = {}
        self.false = Bdd(self, 0)
        self.true = Bdd(self, 1)
        self.declare(*order)

    # -- order ---------------------------------------------------------

    def declare(self, *atoms: Atom) -> None:
        """Append atoms not yet ranked to the end of the order."""
        for a in atoms:
            if a not in self._rank:
                self._rank[a] = len(self._atoms)
                self._atoms.append(a)

    def rank(self, a: Atom) -> int:
        try:
            return self._rank[a]
        except KeyError:
            raise BDDError(f'atom {a} is not ranked in this manager') from None

    def has(self, a: Atom) -> bool:
        return a in self._rank

    @property
    def order(self) -> tuple[Atom, ...]:
        return tuple(self._atoms)

    def __len__(self):
        """Number of nodes ever allocated, terminals included."""
        return len(self._level)

    # -- node plumbing -------------------------------------------------

    def _mk(self, level: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (level, lo, hi)
        u = self._unique.get(key)
        if u is None:
            u = len(self._level)
            self._level.append(level)
            self._lo.append(lo)
            self._hi.append(hi)
            self._unique[key] = u
        return u

    def _own(self, b: Bdd) -> int:
        if not isinstance(b, Bdd):
            raise TypeError(f'expected Bdd, got {type(b).__name__}')
        if b.mgr is not self:
            raise BDDError('operand belongs to a different manager')
        return b.node

    def _wrap(self, u: int) -> Bdd:
        return Bdd(self, u)

    def succ(self, b: Bdd) -> tuple[Atom | None, Bdd, Bdd]:
        """Return `(atom, else_child, then_child)`; atom is None at terminals."""
        u = self._own(b)
        if u < 2:
            return None, b, b
        return (self._atoms[self._level[u]],
                self._wrap(self._lo[u]), self._wrap(self._hi[u]))

    def atom_of(self, b: Bdd) -> Atom | None:
        u = self._own(b)
        return None if u < 2 else self._atoms[self._level[u]]

    # -- construction --------------------------------------------------

    def mk_var(self, a: Atom) -> Bdd:
        return self._wrap(self._mk(self.rank(a), 0, 1))

    var = mk_var

    def constant(self, value: bool) -> Bdd:
        return self.true if value else self.false

    def cube(self, true_atoms: Iterable[Atom], over: Iterable[Atom]) -> Bdd:
        """Conjunction fixing every atom of `over`: members of `true_atoms` positive."""
        pos = set(true_atoms)
        levels = sorted(self.rank(a) for a in over)
        u = 1
        for lvl in reversed(levels):
            if self._atoms[lvl] in pos:
                u = self._mk(lvl, 0, u)
            else:
                u = self._mk(lvl, u, 0)
        return self._wrap(u)

    # -- boolean operations --------------------------------------------

    def apply(self, op: str, a: Bdd, b: Bdd) -> Bdd:
        try:
            code = _OPS[op]
        except KeyError:
            raise ValueError(f'unknown operator {op!r}') from None
        return self._wrap(self._apply(code, self._own(a), self._own(b)))

    def _apply(self, op: int, u: int, v: int) -> int:
        if u < 2 and v < 2:
            return _TABLE[op](u, v)
        if op == AND:
            if u == 0 or v == 0:
                return 0
            if u == 1 or u == v:
                return v
            if v == 1:
                return u
        elif op == OR:
            if u == 1 or v == 1:
                return 1
            if u == 0 or u == v:
                return v
            if v == 0:
                return u
        elif op == XOR:
            if u == v:
                return 0
            if u == 0:
                return v
            if v == 0:
                return u
        elif op == IMPLIES:
            if u == 0 or v == 1 or u == v:
                return 1
            if u == 1:
                return v
        elif op == IFF:
            if u == v:
                return 1
            if u == 1:
                return v
            if v == 1:
                return u
        if op in _COMMUTATIVE and v < u:
            u, v = v, u
        key = (op, u, v)
        r = self._cache.get(key)
        if r is not None:
            return r
        lu, lv = self._level[u], self._level[v]
        lvl = min(lu, lv)
        u0, u1 = (self._lo[u], self._hi[u]) if lu == lvl else (u, u)
        v0, v1 = (self._lo[v], self._hi[v]) if lv == lvl else (v, v)
        r = self._mk(lvl, self._apply(op, u0, v0), self._apply(op, u1, v1))
        self._cache[key] = r
        return r

    def negate(self, a: Bdd) -> Bdd:
        return self._wrap(self._negate(self._own(a)))

    def _negate(self, u: int) -> int:
        if u < 2:
            return 1 - u
        r = self._not.get(u)
        if r is None:
            r = self._mk(self._level[u], self._negate(self._lo[u]),
                         self._negate(self._hi[u]))
            self._not[u] = r
            self._not[r] = u
        return r

    def _ite(self, f: int, g: int, h: int) -> int:
        if f == 1:
            return g
        if f == 0:
            return h
        if g == h:
            return g
        return self._apply(OR, self._apply(AND, f, g),
                           self._apply(AND, self._negate(f), h))

    def ite(self, f: Bdd, g: Bdd, h: Bdd) -> Bdd:
        return self._wrap(self._ite(self._own(f), self._own(g), self._own(h)))

    def conj(self, items: Iterable[Bdd]) -> Bdd:
        u = 1
        for b in items:
            u = self._apply(AND, u, self._own(b))
        return self._wrap(u)

    def disj(self, items: Iterable[Bdd]) -> Bdd:
        u = 0
        for b in items:
            u = self._apply(OR, u, self._own(b))
        return self._wrap(u)

    # -- quantification and substitution -------------------------------

    def quantify(self, kind: str, atoms: Iterable[Atom], a: Bdd) -> Bdd:
        if kind not in ('exists', 'forall'):
            raise ValueError(f'unknown quantifier {kind!r}')
        levels = frozenset(self.rank(x) for x in atoms)
        u = self._own(a)
        if not levels:
            return a
        op = OR if kind == 'exists' else AND
        return self._wrap(self._quant(op, levels, max(levels), u))

    def exists(self, atoms: Iterable[Atom], a: Bdd) -> Bdd:
        return self.quantify('exists', atoms, a)

    def forall(self, atoms: Iterable[Atom], a: Bdd) -> Bdd:
        return self.quantify('forall', atoms, a)

    def _quant(self, op: int, levels: frozenset, top: int, u: int) -> int:
        if u < 2 or self._level[u] > top:
            return u
        key = ('q', op, levels, u)
        r = self._cache.get(key)
        if r is not None:
            return r
        lvl = self._level[u]
        lo = self._quant(op, levels, top, self._lo[u])
        hi = self._quant(op, levels, top, self._hi[u])
        if lvl in levels:
            r = self._apply(op, lo, hi)
        else:
            r = self._mk(lvl, lo, hi)
        self._cache[key] = r
        return r

    def relabel(self, a: Bdd, mapping: Mapping[Atom, Atom]) -> Bdd:
        """Rename atoms; the map must be injective on the support of `a`."""
        u = self._own(a)
        supp = self._support(u)
        image: dict[int, int] = {}
        seen: dict[Atom, Atom] = {}
        for lvl in supp:
            src = self._atoms[lvl]
            dst = mapping.get(src, src)
            if dst in seen and seen[dst] != src:
                raise BDDError(
                    f'relabel map is not injective: {seen[dst]} and {src} -> {dst}')
            seen[dst] = src
            image[lvl] = self.rank(dst)
        if all(k == v for k, v in image.items()):
            return a
        ordered = sorted(image)
        monotone = all(image[x] < image[y] for x, y in zip(ordered, ordered[1:]))
        memo: dict[int, int] = {}

        def rec(w: int) -> int:
            if w < 2:
                return w
            r = memo.get(w)
            if r is None:
                lo, hi = rec(self._lo[w]), rec(self._hi[w])
                lvl = image[self._level[w]]
                if monotone:
                    r = self._mk(lvl, lo, hi)
                else:
                    r = self._ite(self._mk(lvl, 0, 1), hi, lo)
                memo[w] = r
            return r

        return self._wrap(rec(u))

    def substitute(self, a: Bdd, mapping: Mapping[Atom, Bdd]) -> Bdd:
        """Simultaneously replace each mapped atom by a diagram."""
        u = self._own(a)
        subst = {self.rank(x): self._own(g) for x, g in mapping.items()}
        if not subst:
            return a
        memo: dict[int, int] = {}

        def rec(w: int) -> int:
            if w < 2:
                return w
            r = memo.get(w)
            if r is None:
                lvl = self._level[w]
                lo, hi = rec(self._lo[w]), rec(self._hi[w])
                g = subst.get(lvl)
                if g is None:
                    g = self._mk(lvl, 0, 1)
                r = self._ite(g, hi, lo)
                memo[w] = r
            return r

        return self._wrap(rec(u))

    def compose(self, a: Bdd, p: Atom, g: Bdd) -> Bdd:
        return self.substitute(a, {p: g})

    def restrict(self, a: Bdd, p: Atom, value: bool) -> Bdd:
        return self.restrict_many(a, {p: value})

    def restrict_many(self, a: Bdd, values: Mapping[Atom, bool]) -> Bdd:
        u = self._own(a)
        fixed = {self.rank(x): bool(v) for x, v in values.items()}
        if not fixed:
            return a
        top = max(fixed)
        memo: dict[int, int] = {}

        def rec(w: int) -> int:
            if w < 2 or self._level[w] > top:
                return w
            r = memo.get(w)
            if r is None:
                lvl = self._level[w]
                if lvl in fixed:
                    r = rec(self._hi[w] if fixed[lvl] else self._lo[w])
                else:
                    r = self._mk(lvl, rec(self._lo[w]), rec(self._hi[w]))
                memo[w] = r
            return r

        return self._wrap(rec(u))

    # -- inspection ----------------------------------------------------

    def evaluate(self, a: Bdd, state: Iterable[Atom]) -> bool:
        """Truth value under the assignment making exactly `state` true."""
        u = self._own(a)
        if not isinstance(state, (set, frozenset)):
            state = set(state)
        atoms, level, lo, hi = self._atoms, self._level, self._lo, self._hi
        while u > 1:
            u = hi[u] if atoms[level[u]] in state else lo[u]
        return u == 1

    def _support(self, u: int) -> set[int]:
        levels: set[int] = set()
        seen: set[int] = set()
        stack = [u]
        while stack:
            w = stack.pop()
            if w < 2 or w in seen:
                continue
            seen.add(w)
            levels.add(self._level[w])
            stack.append(self._lo[w])
            stack.append(self._hi[w])
        return levels

    def support(self, a: Bdd) -> set[Atom]:
        return {self._atoms[lvl] for lvl in self._support(self._own(a))}

    def node_count(self, a: Bdd) -> int:
        """Reachable nodes, terminals included."""
        u = self._own(a)
        n = self._size.get(u)
        if n is None:
            seen: set[int] = set()
            stack = [u]
            while stack:
                w = stack.pop()
                if w in seen:
                    continue
                seen.add(w)
                if w > 1:
                    stack.append(self._lo[w])
                    stack.append(self._hi[w])
            n = self._size[u] = len(seen)
        return n

    def all_sat(self, a: Bdd, over: Iterable[Atom]) -> Iterator[frozenset[Atom]]:
        """Lazily yield every subset of `over` that satisfies `a`.

        Subsets come in lexicographic order of the manager's ranks, with
        false before true.
        """
        over = list(over)
        u = self._own(a)
        missing = {self._atoms[x] for x in self._support(u)} - set(over)
        if missing:
            raise BDDError(f'all_sat: support atoms {sorted(missing)} not in `over`')
        return self.sat_under(a, {}, over)

    def sat_under(self, a: Bdd, env: Mapping[Atom, bool], free: Iterable[Atom],
                  reverse: bool = False) -> Iterator[frozenset[Atom]]:
        """Lazily yield subsets of `free` satisfying `a` given the fixed `env`.

        Every atom in the support must be in `env` or `free`.  Memory is
        proportional to `len(free)`; no nodes are allocated.
        """
        u = self._own(a)
        free = sorted(free, key=self.rank)
        levels = [self._rank[x] for x in free]
        atoms, level, lo, hi = self._atoms, self._level, self._lo, self._hi
        first, second = (1, 0) if reverse else (0, 1)
        chosen: list[Atom] = []

        def rec(w: int, i: int) -> Iterator[frozenset[Atom]]:
            while w > 1:
                x = atoms[level[w]]
                if x in env:
                    w = hi[w] if env[x] else lo[w]
                else:
                    break
            if w == 0:
                return
            if i == len(levels):
                if w != 1:
                    raise BDDError(f'sat_under: atom {atoms[level[w]]} is unbound')
                yield frozenset(chosen)
                return
            fl = levels[i]
            if w > 1 and level[w] < fl:
                raise BDDError(f'sat_under: atom {atoms[level[w]]} is unbound')
            branch = w > 1 and level[w] == fl
            for val in (first, second):
                nxt = (hi[w] if val else lo[w]) if branch else w
                if val:
                    chosen.append(free[i])
                yield from rec(nxt, i + 1)
                if val:
                    chosen.pop()

        return rec(u, 0)

    def check_ordered(self, a: Bdd) -> bool:
        """Structural scan: ranks strictly increase along every edge."""
        u = self._own(a)
        seen: set[int] = set()
        stack = [u]
        while stack:
            w = stack.pop()
            if w < 2 or w in seen:
                continue
            seen.add(w)
            for c in (self._lo[w], self._hi[w]):
                if self._level[c] <= self._level[w]:
                    return False
                stack.append(c)
            if self._lo[w] == self._hi[w]:
                return False
        return True

    # -- text dump -----------------------------------------------------

    def dump(self, a: Bdd, namer: Callable[[Atom], str] = str) -> str:
        """Line format: `root R`, then `id atom else then` per reachable node.

        Terminals are written `T`/`F`; internal nodes are renumbered from 1
        in increasing allocation order, so children precede parents.
        """
        u = self._own(a)
        reach = sorted(w for w in self._reachable(u) if w > 1)
        ids = {0: 'F', 1: 'T'}
        ids.update({w: str(k) for k, w in enumerate(reach, 1)})
        lines = [f'root {ids[u]}']
        for w in reach:
            atom = self._atoms[self._level[w]]
            lines.append(f'{ids[w]} {namer(atom)} {ids[self._lo[w]]} {ids[self._hi[w]]}')
        return '\n'.join(lines) + '\n'

    def _reachable(self, u: int) -> set[int]:
        seen: set[int] = set()
        stack = [u]
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            if w > 1:
                stack.append(self._lo[w])
                stack.append(self._hi[w])
        return seen

    def load(self, text: str, resolve: Callable[[str], Atom]) -> Bdd:
        """Inverse of `dump`.  Node atoms are resolved by name and must be ranked."""
        nodes = {'T': 1, 'F': 0}
        root = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == 'root':
                if len(parts) != 2:
                    raise BDDError(f'line {lineno}: expected `root ID`')
                root = parts[1]
                continue
            if len(parts) != 4:
                raise BDDError(f'line {lineno}: expected `id atom else then`')
            nid, name, lo, hi = parts
            if nid in nodes:
                raise BDDError(f'line {lineno}: duplicate node id {nid}')
            try:
                lo_u, hi_u = nodes[lo], nodes[hi]
            except KeyError as e:
                raise BDDError(f'line {lineno}: child {e.args[0]} not defined yet') from None
            lvl = self.rank(resolve(name))
            if self._level[lo_u] <= lvl or self._level[hi_u] <= lvl:
                raise BDDError(
                    f'line {lineno}: node {nid} violates the variable order '
                    '(rebuild the diagram under the target order)')
            nodes[nid] = self._mk(lvl, lo_u, hi_u)
        if root is None:
            raise BDDError('missing `root` line')
        if root not in nodes:
            raise BDDError(f'root {root} is not defined')
        return self._wrap(nodes[root])
