"""Acceptance checks.  Each test carries a ``criterion`` marker; the
terminal summary prints one PASS/FAIL line per criterion."""

from __future__ import annotations

import itertools
import time

import pytest
from hypothesis import given, settings

from helpers import CORPUS, corpus_files, domain_violations, frozen_keys, frozen_oracle
from lockgen import Render, lock_programs, path_locksets
from racerlite.absdomain import LADDER, IntIv
from racerlite.frontend import parse_program
from racerlite.frontend.ir import Assign, NondetAssign
from racerlite.oracle import Bounds, enumerate as explore, race_key
from racerlite.pipeline import RunConfig, analyse_mode, run
from racerlite.racedetect import FRESH, Kind, update_base_state

FIG4 = CORPUS / "fig4_escaping_local.c"
FIG5A = CORPUS / "fig5a_alloc_in_child.c"
FIG5B = CORPUS / "fig5b_atomic_restore.c"
FIG6 = CORPUS / "fig6_atomic_counter.c"


def _bases(v, cls=None):
    return [str(r.base) for r in v.reports if cls is None or r.classification == cls]


# -- 1 ---------------------------------------------------------------------


@pytest.mark.criterion(1, "escaping local: one must-race with interp/alias, none with syntactic, < 1 s")
@pytest.mark.parametrize("backend", ["interp", "alias"])
def test_fig4_must_race(backend):
    t0 = time.perf_counter()
    v = run(RunConfig(backend=backend), FIG4)
    dt = time.perf_counter() - t0
    assert v.status == "race"
    assert [(r.base.key(), r.classification) for r in v.reports] == [(("local", "main", "data"), "must")]
    assert dt < 1.0


@pytest.mark.criterion(1, "escaping local: one must-race with interp/alias, none with syntactic, < 1 s")
def test_fig4_syntactic_no_race():
    t0 = time.perf_counter()
    v = run(RunConfig(backend="syntactic"), FIG4)
    assert time.perf_counter() - t0 < 1.0
    assert v.status != "race"
    assert "main::data" not in _bases(v, "must")


# -- 2 ---------------------------------------------------------------------


@pytest.mark.criterion(2, "allocation in a child: interp misses it, syntactic reports it, combined unknown")
def test_fig5a():
    under_interp = run(RunConfig(mode="under", backend="interp"), FIG5A)
    assert under_interp.status != "race" and not under_interp.reports
    under_syn = run(RunConfig(mode="under", backend="syntactic"), FIG5A)
    assert under_syn.status == "race"
    assert [r.base.kind for r in under_syn.reports] == ["dynamic"]
    assert run(RunConfig(mode="combined", backend="interp"), FIG5A).status == "unknown"


# -- 3 ---------------------------------------------------------------------


@pytest.mark.criterion(3, "restored global: over-mode may-race on g, oracle race-free, combined unknown")
def test_fig5b():
    over = run(RunConfig(mode="over"), FIG5B)
    assert over.status != "race_free"
    assert "g" in _bases(over, "may")
    ov = explore(parse_program(FIG5B.read_text()), Bounds(max_steps=200))
    assert ov.exhausted and not ov.racy
    assert run(RunConfig(mode="combined"), FIG5B).status == "unknown"


# -- 4 ---------------------------------------------------------------------


def _fig6_main(extensive: bool):
    p = parse_program(FIG6.read_text())
    ph = analyse_mode(p, "over", RunConfig(mode="over", extensive=extensive))
    b, r = ph.threads.backend, ph.threads.results["main"]
    g = next(x for x in ph.threads.init["main"].values if x.name == "g")
    after_store = seen_reach = None
    for c in b.contexts(r):
        s = ph.program.stmts[c.stmt]
        if s.line == 11 and b.reachable(r, c):  # create(t), right after the store to g
            after_store = b.state(r, c).get(g)
        if s.line == 13 and isinstance(s, (Assign, NondetAssign)):
            seen_reach = bool(seen_reach) or b.reachable(r, c)
    return ph.threads.init["main"].get(g), after_store, bool(seen_reach)


@pytest.mark.criterion(4, "extensive transform keeps g in [0, max_int] and the guarded block reachable")
def test_fig6_without_transform():
    _, after, reach = _fig6_main(False)
    assert after == IntIv(0, 0)
    assert not reach


@pytest.mark.criterion(4, "extensive transform keeps g in [0, max_int] and the guarded block reachable")
def test_fig6_with_transform():
    init, _, reach = _fig6_main(True)
    assert init == IntIv(0, 2**31 - 1)
    assert reach


# -- 5 ---------------------------------------------------------------------


@pytest.mark.criterion(5, "lockset may/must equal path enumeration on random loop-free programs")
@settings(max_examples=1000, deadline=None)
@given(lock_programs(max_sites=3))
def test_lockset_path_enumeration(prog):
    main, helpers = prog
    r = Render(main, helpers)
    want = path_locksets(main, helpers, r)
    p = parse_program(r.text)
    ph = analyse_mode(p, "under", RunConfig(mode="under"))
    b, res, la = ph.threads.backend, ph.threads.results["main"], ph.locksets["main"]
    got = {}
    for c in b.contexts(res):
        s = p.stmts[c.stmt]
        assert la.must_ls(c) <= la.may_ls(c)
        if isinstance(s, Assign):
            got.setdefault((tuple(p.stmts[sid].line for sid, _ in c.calls), s.line), []).append(c)
    for key, paths in want.items():
        (c,) = got[key]
        may = {l.address.base.name for l in la.may_ls(c)}
        must = {l.address.base.name for l in la.must_ls(c)}
        assert may == set().union(*paths), (r.text, key)
        assert must == set(frozenset.intersection(*paths)), (r.text, key)


# -- 6 ---------------------------------------------------------------------

RW_TWO_READERS = """\
#include <pthread.h>
pthread_rwlock_t rw;
int table;
void *first(void *p) {
  pthread_rwlock_rdlock(&rw);
  table = 1;
  pthread_rwlock_unlock(&rw);
  return NULL;
}
void *second(void *p) {
  pthread_rwlock_rdlock(&rw);
  table = 2;
  pthread_rwlock_unlock(&rw);
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, first, NULL);
  pthread_create(&b, NULL, second, NULL);
  return 0; }
"""

RW_READ_WRITE = RW_TWO_READERS.replace("table = 1;", "int v = table;").replace(
    "pthread_rwlock_rdlock(&rw);\n  table = 2;", "pthread_rwlock_wrlock(&rw);\n  table = 2;")


@pytest.mark.criterion(6, "read-write locks: read-locked writes race, read vs write lock is protected")
def test_rwlock_programs():
    assert len(RW_TWO_READERS.splitlines()) == 20 == len(RW_READ_WRITE.splitlines())
    v = run(RunConfig(), RW_TWO_READERS)
    assert v.status == "race" and _bases(v) == ["table"]
    assert explore(parse_program(RW_TWO_READERS)).racy
    v = run(RunConfig(), RW_READ_WRITE)
    assert v.status == "race_free"
    assert not explore(parse_program(RW_READ_WRITE)).racy


# -- 7 ---------------------------------------------------------------------

# Independent encoding of the access-state graph: state -> {(same thread?, access): next}
# with "o" meaning the accessing thread becomes the owner.
GRAPH = {
    "Fresh": {(None, "r"): "ReadOnly o", (None, "w"): "Exclusive o"},
    "ReadOnly": {(True, "r"): "ReadOnly o", (True, "w"): "Exclusive o",
                 (False, "r"): "Shared", (False, "w"): "SharedMod"},
    "Exclusive": {(True, "r"): "Exclusive o", (True, "w"): "Exclusive o",
                  (False, "r"): "SharedMod", (False, "w"): "SharedMod"},
    "Shared": {(None, "r"): "Shared", (None, "w"): "SharedMod"},
    "SharedMod": {(None, "r"): "SharedMod", (None, "w"): "SharedMod"},
}
ORDER = {"Fresh": 0, "ReadOnly": 1, "Exclusive": 1, "Shared": 2, "SharedMod": 3}


def _table_run(seq, unique):
    state, owner = "Fresh", None
    for t, a in seq:
        row = GRAPH[state]
        same = None if (None, a) in row else (t == owner and unique[t])
        nxt = row[(same, a)]
        if nxt.endswith(" o"):
            state, owner = nxt[:-2], owner or t
        else:
            state, owner = nxt, None
    return state, owner


@pytest.mark.criterion(7, "access-state machine matches the transition table on all sequences up to 5")
@pytest.mark.parametrize("unique", [{"t1": True, "t2": True}, {"t1": False, "t2": True}])
def test_state_machine_exhaustive(unique):
    steps = [(t, a) for t in ("t1", "t2") for a in ("r", "w")]
    n = 0
    for length in range(6):
        for seq in itertools.product(steps, repeat=length):
            s = FRESH
            prev = 0
            for t, a in seq:
                s = update_base_state(s, t, "read" if a == "r" else "write", unique)
                assert ORDER[s.kind.value] >= prev
                prev = ORDER[s.kind.value]
            want = _table_run(seq, unique)
            assert (s.kind.value, s.owner) == want, seq
            if len({t for t, _ in seq}) == 1 and unique[seq[0][0]]:
                assert s.kind is not Kind.SHARED_MOD
            n += 1
    assert n == sum(4**k for k in range(6))


# -- 8 ---------------------------------------------------------------------

CATEGORIES = ("create_loop", "trylock", "join", "array", "escape", "atomic", "thread_local")


@pytest.mark.criterion(8, "corpus: no false must-races, sound race_free, >= 70% recall, < 60 s")
def test_corpus_against_oracle():
    files = corpus_files()
    assert len(files) >= 30
    for cat in CATEGORIES:
        assert any(cat in f.name for f in files), cat
    oracle = frozen_oracle()
    t0 = time.perf_counter()
    racy = found = 0
    for f in files:
        truth = oracle[f.name]
        assert truth["exhausted"], f.name
        keys = frozen_keys(truth)
        v = run(RunConfig(), f)
        for r in v.reports:
            if r.classification == "must":
                assert race_key(r) in keys, (f.name, str(r.base), r.first.line, r.second.line)
        if v.status == "race_free":
            assert not truth["race"], f.name
        if truth["race"]:
            racy += 1
            found += v.status == "race"
    assert time.perf_counter() - t0 < 60
    assert racy and found / racy >= 0.7, (found, racy)


# -- 9 ---------------------------------------------------------------------


@pytest.mark.criterion(9, "single-threaded oracle values lie within the interp abstraction")
def test_domain_soundness():
    bad = [v for f in corpus_files() for v in domain_violations(f)]
    assert bad == []


# -- 10 --------------------------------------------------------------------


@pytest.mark.criterion(10, "one analysis per entry per iteration (under), bounded sweeps (over)")
def test_fixpoint_behaviour():
    ladder = len(LADDER) + 1  # rungs plus the type bound
    for f in corpus_files():
        p = parse_program(f.read_text())
        under = analyse_mode(p, "under", RunConfig(mode="under")).threads
        if under.graph.is_acyclic():
            for calls in under.per_iteration_calls:
                assert max(calls.values(), default=0) <= 1, f.name
        over = analyse_mode(p, "over", RunConfig(mode="over")).threads
        nbases = len(list(p.all_decls())) + sum(type(s).__name__ == "Alloc" for s in p.stmts.values())
        assert over.sweeps <= (ladder + 2) * max(nbases, 1), (f.name, over.sweeps)
