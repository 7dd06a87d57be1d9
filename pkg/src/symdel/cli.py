"""Command-line interface: check, translate, qbf, bench.

Exit codes: 0 success, 1 result differs from --expect (or a verification
mismatch), 2 usage error, 3 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .bdd import BDDError, Manager
from .frontend import (
    SourceError, format_formula, format_model, format_program, parse_formula,
    parse_model, parse_program, parse_qdimacs,
)
from .kripke import qbf_eval, qbf_to_belief_instance, qbf_to_instance
from .logic import Announce, LogicError, Var, Vocabulary, formula_length
from .programs import mp_length, program_of_relation, relation_of
from .pspace import (
    ALGORITHMS, CheckStats, announcement_tower, check, check_delk, model_check,
    reduce_announcements, tree_length,
)
from .structures import KnowledgeStructure, StructureError, eval_bdd_algo
from .translations import (
    TauStats, TranslationError, bdd_to_mp, blowup_formula, blowup_witness,
    contrast_order, grid_relation, mp_to_bdd, relation_of_bdd,
)

BLOWUP_MAX_N = 10
TRADEOFF_MAX_DEPTH = 12
GRID_MAX_V = 14
VERIFY_MAX_ATOMS = 8


class InputError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    result: object = None
    stats: dict | None = None
    wall_time: float | None = None
    exit_code: int = 0
    lines: list[str] = field(default_factory=list)
    rows: list[dict] | None = None
    format: str = 'text'


def _state_arg(text: str | None, vocab: Vocabulary):
    if text is None:
        return None
    try:
        return vocab.state(text)
    except LogicError as e:
        raise InputError(str(e)) from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise InputError(f'cannot read {path}: {e.strerror or e}') from None


def _write(path: str | None, text: str, report: RunReport) -> None:
    if path is None or path == '-':
        report.lines.extend(text.rstrip('\n').split('\n'))
        return
    try:
        Path(path).write_text(text, encoding='utf-8')
    except OSError as e:
        raise InputError(f'cannot write {path}: {e.strerror or e}') from None


# -- check ---------------------------------------------------------------------

def cmd_check(args, report: RunReport) -> None:
    model = parse_model(_read(args.model))
    if args.formula is None and args.formula_file is None:
        raise InputError('give --formula or --formula-file')
    text = args.formula if args.formula is not None else _read(args.formula_file)
    phi = parse_formula(text, model.vocab, transformers=model.transformers,
                        agents=model.agents)
    state = _state_arg(args.state, model.vocab)
    if state is None:
        state = model.state
    if state is None:
        raise InputError('no state given: use --state or a state line in the model')
    value, stats = model_check(model.structure, state, phi, args.algo, jobs=args.jobs)
    report.result = value
    report.stats = asdict(stats)
    report.lines.append('true' if value else 'false')
    if args.stats:
        report.lines.append(str(stats))
    if args.expect is not None and value != (args.expect == 'true'):
        report.exit_code = 1


# -- translate -------------------------------------------------------------------

def _manager(vocab: Vocabulary, order: str) -> Manager:
    mgr = Manager()
    if order == 'interleaved':
        vocab.declare(mgr)
    else:
        for k in range(3):
            mgr.declare(*(a.at(k) for a in vocab))
    return mgr


def cmd_translate(args, report: RunReport) -> None:
    if args.vocab is None:
        raise InputError('--vocab is required')
    vocab = Vocabulary.of(args.vocab)
    mgr = _manager(vocab, args.order)
    text = _read(args.input)
    if args.direction == 'mp2bdd':
        prog = parse_program(text, vocab)
        omega = mp_to_bdd(prog, vocab.atoms, mgr)
        _write(args.out, mgr.dump(omega, vocab.name), report)
        report.result = mgr.node_count(omega)
        report.lines.append(f'nodes={report.result}')
        if args.verify:
            _verify(report, vocab, relation_of(prog, vocab.atoms), relation_of_bdd(omega, vocab.atoms))
    else:
        try:
            omega = mgr.load(text, vocab.atom)
        except LogicError as e:
            raise InputError(str(e)) from None
        stats = TauStats()
        prog = bdd_to_mp(omega, vocab.atoms, stats)
        _write(args.out, format_program(prog, vocab) + '\n', report)
        report.result = mp_length(prog)
        report.lines.append(f'length={report.result}')
        if args.verify:
            _verify(report, vocab, relation_of(prog, vocab.atoms), relation_of_bdd(omega, vocab.atoms))


def _verify(report: RunReport, vocab: Vocabulary, a, b) -> None:
    if len(vocab) > VERIFY_MAX_ATOMS:
        raise InputError(f'--verify is limited to {VERIFY_MAX_ATOMS} atoms')
    if a == b:
        report.lines.append('verify=ok')
    else:
        report.lines.append('verify=MISMATCH')
        report.exit_code = 1


# -- qbf -------------------------------------------------------------------------

def cmd_qbf(args, report: RunReport) -> None:
    psi = parse_qdimacs(_read(args.input))
    F, s, phi = qbf_to_instance(psi)
    red = check(F, [], s, phi)
    brute = qbf_eval(psi)
    ok = red == brute
    if args.check:
        G, s2, phi2 = qbf_to_belief_instance(psi)
        ok = ok and check_delk(G, [], s2, phi2) == brute
    report.result = {'reduction': red, 'brute': brute, 'ok': ok}
    report.lines.append(f'reduction={str(red).lower()} brute={str(brute).lower()} '
                        f'{"ok" if ok else "MISMATCH"}')
    if args.emit_instance:
        out = Path(args.emit_instance)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / 'instance.epi').write_text(format_model(F, state=s), encoding='utf-8')
            (out / 'formula.txt').write_text(format_formula(phi, F.vocab) + '\n', encoding='utf-8')
        except OSError as e:
            raise InputError(f'cannot write instance: {e.strerror or e}') from None
        report.lines.append(f'instance={out}')
    if not ok:
        report.exit_code = 1


# -- bench -----------------------------------------------------------------------

def _table(report: RunReport, rows: list[dict], deterministic: bool) -> None:
    if deterministic:
        for r in rows:
            r.pop('time', None)
    report.rows = (report.rows or []) + rows
    if not rows:
        return
    cols = list(rows[0])
    report.lines.append(' '.join(cols))
    for r in rows:
        report.lines.append(' '.join(_cell(r[c]) for c in cols))


def _cell(v) -> str:
    if isinstance(v, bool):
        return 'yes' if v else 'no'
    if isinstance(v, float):
        return f'{v:.4f}'
    return str(v)


def bench_blowup(n_max: int) -> list[dict]:
    rows = []
    for n in range(1, n_max + 1):
        t0 = time.perf_counter()
        w = blowup_witness(n)
        bad = Manager(w.order)
        nodes = bad.node_count(mp_to_bdd(w.program, w.vocab.atoms, bad))
        good = Manager(contrast_order(w.vocab, n))
        contrast = good.node_count(mp_to_bdd(w.program, w.vocab.atoms, good))
        rows.append({'n': n, 'mp_length': mp_length(w.program), 'nodes': nodes,
                     'bound': 2 ** (n + 1), 'ok': nodes >= 2 ** (n + 1),
                     'contrast_nodes': contrast, 'time': time.perf_counter() - t0})
    return rows


def bench_tradeoff(depth: int) -> tuple[list[dict], list[dict]]:
    tower = []
    for d in range(1, depth + 1):
        t0 = time.perf_counter()
        vocab = Vocabulary(['p'])
        mgr = Manager()
        vocab.declare(mgr)
        F = KnowledgeStructure(vocab, mgr.true, {'i': frozenset()})
        phi = announcement_tower('i', vocab['p'], d)
        s = frozenset(vocab.atoms)
        ps = CheckStats()
        v1 = check(F, [], s, phi, ps)
        bs = CheckStats()
        v2 = eval_bdd_algo(F, s, phi, bs)
        tower.append({'d': d, 'length': formula_length(phi),
                      'reduced_length': tree_length(reduce_announcements(phi)),
                      'pspace_depth': ps.depth, 'pspace_peak': ps.peak_nodes,
                      'bdd_peak': bs.peak_nodes, 'agree': v1 == v2,
                      'time': time.perf_counter() - t0})
    beta = []
    for n in range(2, max(2, min(depth, 6)) + 1):
        t0 = time.perf_counter()
        w = blowup_witness(n)
        row = {'n': n}
        values = []
        for algo in ('pspace', 'bdd'):
            mgr = Manager(w.order)
            F = KnowledgeStructure(w.vocab, mgr.true, {'i': frozenset()})
            phi = Announce(blowup_formula(w.vocab, n), Var(w.vocab.atoms[0]))
            s = frozenset(w.vocab.atoms)
            value, stats = model_check(F, s, phi, algo)
            values.append(value)
            row[f'{algo}_peak'] = stats.peak_nodes
        row['bound'] = 2 ** (n + 1)
        row['agree'] = values[0] == values[1]
        row['time'] = time.perf_counter() - t0
        beta.append(row)
    return tower, beta


def bench_grid(v_max: int) -> list[dict]:
    rows = []
    for v in range(1, v_max + 1):
        t0 = time.perf_counter()
        vocab = Vocabulary([f'p{k}' for k in range(1, v + 1)])
        mgr = Manager()
        vocab.declare(mgr)
        g = grid_relation(vocab.atoms, mgr)
        row = {'v': v, 'nodes': mgr.node_count(g)}
        if v <= VERIFY_MAX_ATOMS:
            R = relation_of_bdd(g, vocab.atoms)
            row['pairs'] = len(R)
            row['lemma_length'] = mp_length(program_of_relation(R, vocab.atoms))
        else:
            row['pairs'] = row['lemma_length'] = '-'
        row['tau_length'] = mp_length(bdd_to_mp(g, vocab.atoms))
        row['time'] = time.perf_counter() - t0
        rows.append(row)
    return rows


def cmd_bench(args, report: RunReport) -> None:
    if args.family == 'blowup':
        n = _guard(args.n, 'n', 1, BLOWUP_MAX_N)
        rows = bench_blowup(n)
        _table(report, rows, args.deterministic)
        report.result = all(r['ok'] for r in rows)
    elif args.family == 'tradeoff':
        d = _guard(args.depth, 'depth', 1, TRADEOFF_MAX_DEPTH)
        tower, beta = bench_tradeoff(d)
        _table(report, tower, args.deterministic)
        _table(report, beta, args.deterministic)
        report.result = all(r['agree'] for r in tower + beta)
    else:
        v = _guard(args.v, 'v', 1, GRID_MAX_V)
        _table(report, bench_grid(v), args.deterministic)
        report.result = True
    if not report.result:
        report.exit_code = 1


def _guard(value, name, lo, hi) -> int:
    if value is None:
        raise InputError(f'--{name} is required')
    if not lo <= value <= hi:
        raise InputError(f'--{name} must be between {lo} and {hi}')
    return value


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog='symdel', description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=('text', 'json'), default='text')
    common.add_argument('--deterministic', action='store_true',
                        help='suppress wall-time fields')
    sub = ap.add_subparsers(dest='command', required=True)

    c = sub.add_parser('check', parents=[common], help='model check a formula')
    c.add_argument('--model', required=True)
    c.add_argument('--state', help="true atoms, e.g. 'p,q' (default: the model's state)")
    g = c.add_mutually_exclusive_group()
    g.add_argument('--formula')
    g.add_argument('--formula-file')
    c.add_argument('--algo', choices=ALGORITHMS, default='pspace')
    c.add_argument('--expect', choices=('true', 'false'))
    c.add_argument('--stats', action='store_true')
    c.add_argument('--jobs', type=int, default=1)

    t = sub.add_parser('translate', parents=[common],
                       help='mental program <-> relation BDD')
    t.add_argument('direction', choices=('mp2bdd', 'bdd2mp'))
    t.add_argument('--in', dest='input', required=True)
    t.add_argument('--vocab')
    t.add_argument('--order', choices=('interleaved', 'listed'), default='interleaved')
    t.add_argument('--out')
    t.add_argument('--verify', action='store_true')

    q = sub.add_parser('qbf', parents=[common], help='QBF via the model-checking reduction')
    q.add_argument('--in', dest='input', required=True)
    q.add_argument('--emit-instance', metavar='DIR')
    q.add_argument('--check', action='store_true',
                   help='also run the belief-structure variant')

    b = sub.add_parser('bench', parents=[common], help='benchmarks')
    b.add_argument('family', choices=('blowup', 'tradeoff', 'grid'))
    b.add_argument('--n', type=int)
    b.add_argument('--depth', type=int)
    b.add_argument('--v', type=int)
    return ap


COMMANDS = {'check': cmd_check, 'translate': cmd_translate, 'qbf': cmd_qbf, 'bench': cmd_bench}
INPUT_ERRORS = (InputError, SourceError, StructureError, LogicError, TranslationError,
                BDDError, ValueError)


def run(argv=None) -> RunReport:
    args = build_parser().parse_args(argv)
    report = RunReport(command=' '.join(['symdel'] + list(argv if argv is not None else sys.argv[1:])))
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](args, report)
    except INPUT_ERRORS as e:
        report.exit_code = 3
        report.result = None
        report.lines = [f'error: {e}']
    report.wall_time = None if args.deterministic else time.perf_counter() - t0
    report.format = args.format
    if args.command == 'check' and args.stats and report.exit_code != 3 \
            and report.wall_time is not None:
        report.lines.append(f'time={report.wall_time:.6f}s')
    return report


def main(argv=None) -> int:
    report = run(argv)
    if report.format == 'json':
        obj = {'command': report.command, 'result': report.result, 'stats': report.stats,
               'wall_time': report.wall_time, 'exit_code': report.exit_code}
        if report.rows is not None:
            obj['rows'] = report.rows
        if report.exit_code == 3:
            obj['error'] = report.lines[0][len('error: '):]
        print(json.dumps(obj, sort_keys=True))
    elif report.exit_code == 3:
        print(report.lines[0], file=sys.stderr)
    else:
        for line in report.lines:
            print(line)
    return report.exit_code


if __name__ == '__main__':
    sys.exit(main())
