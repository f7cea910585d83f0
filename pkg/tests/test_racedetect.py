import pytest
from hypothesis import given, strategies as st

from helpers import CORPUS, corpus_files
from racerlite.absdomain import Base, IntIv
from racerlite.backends.base import Context
from racerlite.frontend import parse_program
from racerlite.pipeline import RunConfig, analyse_mode
from racerlite.racedetect import (
    FRESH,
    AccessEvent,
    Kind,
    RaceChecker,
    candidate_clusters,
    collect_accesses,
    escapes,
    final_base_state,
    update_base_state,
)


def _phase(src, mode="under", backend="interp"):
    p = parse_program(src)
    return analyse_mode(p, mode, RunConfig(mode=mode, backend=backend))


def _file(name):
    return (CORPUS / name).read_text()


def _ev(thread, kind, name="g", sid=1):
    return AccessEvent(Context(thread, (), sid), Base("global", name, None), IntIv(0, 0), 4, kind)


# -- accesses ---------------------------------------------------------------


def test_fig4_events():
    ph = _phase(_file("fig4_escaping_local.c"))
    events, _ = collect_accesses(ph.threads)
    writes = {e.thread for e in events if e.kind == "write" and e.base.name == "data"}
    assert writes == {"main", "t1", "t2"}  # main writes the initialiser


def test_atomic_only_has_no_candidates():
    src = """
    atomic_int a;
    void *t(void *x) { a = 1; return NULL; }
    int main() { create(t); a = 2; return 0; }
    """
    ph = _phase(src)
    events, _ = collect_accesses(ph.threads)
    assert all(e.atomic for e in events if e.base.name == "a")
    assert candidate_clusters(events, ph.threads.unique) == {}
    assert not ph.detection.reports


def test_thread_local_excluded():
    src = """
    _Thread_local int t;
    void *f(void *x) { t = 1; return NULL; }
    int main() { create(f); t = 2; return 0; }
    """
    ph = _phase(src)
    events, _ = collect_accesses(ph.threads)
    assert not [e for e in events if e.base.name == "t"]


def test_read_only_global_two_reads():
    src = """
    int g = 3;
    void *f(void *x) { int v = g; return NULL; }
    int main() { create(f); int w = g; return 0; }
    """
    ph = _phase(src)
    events, _ = collect_accesses(ph.threads)
    reads = [e for e in events if e.base.name == "g"]
    assert len(reads) == 2 and {e.kind for e in reads} == {"read"}
    assert not ph.detection.reports


# -- escape --------------------------------------------------------------------


def test_escape_cases():
    ph = _phase(_file("fig4_escaping_local.c"))
    assert escapes(Base("local", "data", "main"), ph.threads)
    src = """
    int g; int *gp;
    int main() { int priv = 1; int leaked = 2; gp = &leaked; g = priv; return 0; }
    """
    ph = _phase(src)
    assert escapes(Base("global", "g", None), ph.threads)
    assert not escapes(Base("local", "priv", "main"), ph.threads)
    assert escapes(Base("local", "leaked", "main"), ph.threads)


def test_syntactic_dynamic_always_escapes():
    ph = _phase(_file("heap_private.c"), backend="syntactic")
    events, _ = collect_accesses(ph.threads)
    for e in events:
        if e.base.kind == "dynamic":
            assert escapes(e.base, ph.threads)


# -- state machine ------------------------------------------------------------


def test_state_machine_examples():
    u = {"t1": True, "t2": True}
    s = update_base_state(FRESH, "t1", "read", u)
    assert (s.kind, s.owner) == (Kind.READ_ONLY, "t1")
    s = update_base_state(s, "t2", "read", u)
    assert s.kind is Kind.SHARED
    assert update_base_state(s, "t2", "write", u).kind is Kind.SHARED_MOD
    single = final_base_state([_ev("t1", "read"), _ev("t1", "write"), _ev("t1", "read")], u)
    assert (single.kind, single.owner) == (Kind.EXCLUSIVE, "t1")


def test_exclusive_non_unique_is_candidate():
    evs = [_ev("t2", "write")]
    assert candidate_clusters(evs, {"t2": False})
    assert not candidate_clusters(evs, {"t2": True})


def test_clusters_drop_shared_and_exclusive():
    u = {"t1": True, "t2": True}
    assert candidate_clusters([_ev("t1", "read"), _ev("t2", "read")], u) == {}
    assert candidate_clusters([_ev("t1", "write", "a"), _ev("t2", "write", "b")], u) == {}
    got = candidate_clusters([_ev("t1", "write"), _ev("t2", "write")], u)
    assert [b.name for b in got] == ["g"]


_steps = st.lists(st.tuples(st.sampled_from(["t1", "t2", "t3"]), st.sampled_from(["read", "write"])), max_size=12)


@given(_steps, st.booleans())
def test_state_machine_monotone(seq, t1_unique):
    order = {Kind.FRESH: 0, Kind.READ_ONLY: 1, Kind.EXCLUSIVE: 1, Kind.SHARED: 2, Kind.SHARED_MOD: 3}
    unique = {"t1": t1_unique, "t2": True, "t3": True}
    s, prev = FRESH, 0
    for t, k in seq:
        s = update_base_state(s, t, k, unique)
        assert order[s.kind] >= prev
        prev = order[s.kind]
    if seq and "write" in {k for _, k in seq} and len({t for t, _ in seq}) > 1:
        assert s.kind is Kind.SHARED_MOD or s.kind is Kind.EXCLUSIVE


# -- race conditions --------------------------------------------------------------


def test_fig4_must():
    ph = _phase(_file("fig4_escaping_local.c"))
    (r,) = ph.detection.reports
    assert r.classification == "must" and r.base.name == "data"
    assert set(r.witness) == {"lockset_may", "lockset_must", "active", "offsets"}


def test_common_lock_prevents_race():
    ph = _phase(_file("counter_locked.c"))
    assert not ph.detection.reports
    ph = _phase(_file("counter_locked.c"), mode="over")
    assert not ph.detection.reports


def test_fig5b_over_may():
    ph = _phase(_file("fig5b_atomic_restore.c"), mode="over")
    assert [r.base.name for r in ph.detection.reports if r.classification == "may"]
    assert not ph.detection.must


def test_malloc_in_loop_may_only():
    src = """
    int *p;
    void *t(void *a) { *p = 1; return NULL; }
    int main() { int i;
      for (i = 0; i < 3; i++) { p = malloc(sizeof(int)); }
      create(t); create(t);
      return 0; }
    """
    ph = _phase(src)
    dyn = [r for r in ph.detection.reports if r.base.kind == "dynamic"]
    assert dyn and all(r.classification == "may" for r in dyn)


def test_array_range_vs_cell_may_only():
    src = """
    int a[10];
    void *t1(void *x) { int i = __VERIFIER_nondet_int(); if (i >= 0 && i < 10) a[i] = 1; return NULL; }
    void *t2(void *x) { a[3] = 2; return NULL; }
    int main() { create(t1); create(t2); return 0; }
    """
    ph = _phase(src)
    reps = [r for r in ph.detection.reports if r.base.name == "a"]
    assert reps and all(r.classification == "may" for r in reps)


def test_array_disjoint_cells():
    ph = _phase(_file("array_disjoint.c"))
    assert not ph.detection.reports


def test_single_thread_no_reports():
    ph = _phase("int g; int main() { g = 1; g = g + 1; return 0; }")
    assert not ph.detection.reports and not ph.detection.clusters


def test_base_isolation():
    src = """
    int a; int b;
    void *t1(void *x) { a = 1; return NULL; }
    void *t2(void *x) { b = 1; return NULL; }
    int main() { create(t1); create(t2); return 0; }
    """
    assert not _phase(src).detection.reports


def test_dedup_one_report_per_pair():
    src = """
    int g;
    void *t(void *x) { g = 1; return NULL; }
    int main() { create(t); create(t); return 0; }
    """
    ph = _phase(src)
    keys = [(r.base, frozenset({r.first.stmt, r.second.stmt})) for r in ph.detection.reports]
    assert len(keys) == len(set(keys))


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
@pytest.mark.parametrize("mode", ["under", "over"])
def test_must_implies_may(path, mode):
    ph = analyse_mode(parse_program(path.read_text()), mode, RunConfig(mode=mode))
    checker = RaceChecker(ph.threads, ph.locksets, ph.active)
    for evs in ph.detection.clusters.values():
        for i, e1 in enumerate(evs):
            for e2 in evs[i:]:
                if checker.must_race(e1, e2):
                    assert checker.may_race(e1, e2)
    if mode == "over":
        assert not ph.detection.must
    for r in ph.detection.reports:
        assert r.base == r.first.base == r.second.base
        assert "write" in (r.first.kind, r.second.kind)


def test_unconditional_nodes():
    from racerlite.backends.base import unconditional_nodes

    p = parse_program("int g; int main() { g = 1; if (g) g = 2; g = 3; return 0; }")
    f = p.functions["main"]
    texts = {str(p.stmts[n]).rstrip(";") for n in unconditional_nodes(f)}
    assert {"g = 1", "g = 3"} <= texts and "g = 2" not in texts


@pytest.mark.parametrize("backend", ["syntactic", "alias"])
def test_branch_blind_backends_no_must_on_dead_code(backend):
    ph = _phase(_file("fig5b_atomic_restore.c"), backend=backend)
    assert ph.detection.reports and not ph.detection.must


@pytest.mark.parametrize("backend", ["syntactic", "alias"])
def test_branch_blind_must_races_are_real(backend):
    from helpers import frozen_keys, frozen_oracle
    from racerlite.frontend import detect_active_waiting
    from racerlite.oracle import race_key

    oracle = frozen_oracle()
    for f in corpus_files():
        p = parse_program(f.read_text())
        if detect_active_waiting(p):  # the pipeline does not analyse these
            continue
        ph = analyse_mode(p, "under", RunConfig(mode="under", backend=backend))
        for r in ph.detection.must:
            assert race_key(r) in frozen_keys(oracle[f.name]), (f.name, str(r.base))
