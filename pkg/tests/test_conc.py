import pytest
from hypothesis import given, strategies as st

from helpers import CORPUS, corpus_files
from racerlite.absdomain import Address, Base, IntIv
from racerlite.conc import Lock, format_locksets, guarded_intersection, lockset_transfer, resolve_thread_id
from racerlite.conc.lockset import select_locks
from racerlite.frontend import parse_program
from racerlite.frontend.ir import Assign, Call
from racerlite.pipeline import RunConfig, analyse_mode


def _phase(src, **kw):
    p = parse_program(src)
    return analyse_mode(p, "under", RunConfig(mode="under", **kw))


def _ctxs(ph, thread, line, kind=Assign):
    ta = ph.threads
    r = ta.results[thread]
    return [c for c in ta.backend.contexts(r)
            if ph.program.stmts[c.stmt].line == line and isinstance(ph.program.stmts[c.stmt], kind)]


def _names(ls):
    return {str(l) for l in ls}


def _addr(name):
    return Address(Base("global", name, None), IntIv(0, 0))


# -- lockset transfer --------------------------------------------------------


def test_lock_then_unlock():
    ph = _phase("pthread_mutex_t m; int x; int main() { lock(&m); x = 1; unlock(&m); x = 2; return 0; }")
    la = ph.locksets["main"]
    held = [c for c in _ctxs(ph, "main", 1) if str(ph.program.stmts[c.stmt]).startswith("x = 1")]
    after = [c for c in _ctxs(ph, "main", 1) if str(ph.program.stmts[c.stmt]).startswith("x = 2")]
    assert _names(la.must_ls(held[0])) == {"m"} == _names(la.may_ls(held[0]))
    assert la.may_ls(after[0]) == frozenset()


def test_lock_through_pointer_forks():
    src = """
    pthread_mutex_t m1, m2; pthread_mutex_t *p; int x;
    int main() { if (__VERIFIER_nondet_int()) p = &m1; else p = &m2;
      lock(p);
      x = 1;
      return 0; }
    """
    ph = _phase(src)
    la = ph.locksets["main"]
    (c,) = _ctxs(ph, "main", 5)
    assert la.entries(c) == {frozenset({Lock(_addr("m1"))}), frozenset({Lock(_addr("m2"))})}
    assert _names(la.may_ls(c)) == {"m1", "m2"}
    assert la.must_ls(c) == frozenset()


def test_fig5b_main_must_lockset():
    ph = _phase((CORPUS / "fig5b_atomic_restore.c").read_text())
    la = ph.locksets["main"]
    cs = _ctxs(ph, "main", 15)
    assert len(cs) == 2
    for c in cs:
        assert _names(la.must_ls(c)) == {"L"}


def test_no_lock_ops_gives_empty_summaries():
    ph = _phase("int x; int main() { x = 1; x = 2; return 0; }")
    la = ph.locksets["main"]
    for c in ph.threads.backend.contexts(ph.threads.results["main"]):
        assert la.entries(c) == {frozenset()}


def test_branch_lock_summaries():
    src = """
    pthread_mutex_t m1; int x;
    int main() {
      if (__VERIFIER_nondet_int()) lock(&m1);
      x = 1;
      return 0; }
    """
    ph = _phase(src)
    la = ph.locksets["main"]
    (c,) = _ctxs(ph, "main", 5)
    assert la.entries(c) == {frozenset(), frozenset({Lock(_addr("m1"))})}
    assert _names(la.may_ls(c)) == {"m1"} and la.must_ls(c) == frozenset()


def test_unknown_lock_is_noop():
    ph = _phase("pthread_mutex_t *p; int x; int main() { lock(p); x = 1; return 0; }")
    la = ph.locksets["main"]
    (c,) = _ctxs(ph, "main", 1)
    assert la.must_ls(c) == frozenset()


def test_unlock_not_held_is_noop():
    ph = _phase("pthread_mutex_t m; int x; int main() { unlock(&m); x = 1; return 0; }")
    (c,) = _ctxs(ph, "main", 1)
    assert ph.locksets["main"].entries(c) == {frozenset()}


def test_threshold_limits_targets():
    addrs = [_addr(n) for n in ("d", "a", "c", "b")]
    assert [a.base.name for a in select_locks(addrs)] == ["a", "b", "c"]
    assert [a.base.name for a in select_locks(addrs, 1)] == ["a"]


def test_threshold_applies_in_transfer():
    src = """
    pthread_mutex_t m1, m2, m3, m4; pthread_mutex_t *p; int x;
    int main() { int k = __VERIFIER_nondet_int();
      if (k == 1) p = &m1; else if (k == 2) p = &m2; else if (k == 3) p = &m3; else p = &m4;
      lock(p);
      x = 1;
      return 0; }
    """
    ph = _phase(src)
    (c,) = _ctxs(ph, "main", 6)
    assert _names(ph.locksets["main"].may_ls(c)) == {"m1", "m2", "m3"}
    ph = _phase(src, threshold=1)
    (c,) = _ctxs(ph, "main", 6)
    assert _names(ph.locksets["main"].may_ls(c)) == {"m1"}


# -- trylock -------------------------------------------------------------------

TRY = """
pthread_mutex_t m; int x;
int main() { int rc;
  rc = pthread_mutex_trylock(&m);
  if (rc == 0) {
    x = 1;
  }
  x = 2;
  return 0; }
"""


def test_trylock_checked_branch_keeps_lock():
    ph = _phase(TRY)
    la = ph.locksets["main"]
    (inside,) = _ctxs(ph, "main", 6)
    assert _names(la.must_ls(inside)) == {"m?"}
    (after,) = _ctxs(ph, "main", 8)
    assert _names(la.may_ls(after)) == {"m?"}
    assert la.must_ls(after) == frozenset()


# -- guarded intersection --------------------------------------------------------

R, W = Lock(_addr("r"), "read"), Lock(_addr("r"), "write")
M = Lock(_addr("m"))


def test_guarded_intersection_examples():
    assert guarded_intersection({M}, {M}) == {_addr("m")}
    assert guarded_intersection({R}, {R}) == frozenset()
    assert guarded_intersection({R}, {W}) == {_addr("r")}
    assert guarded_intersection({M}, set()) == frozenset()


_locks = st.builds(Lock, st.sampled_from([_addr("a"), _addr("b")]), st.sampled_from(["read", "write", "plain"]))


@given(st.frozensets(_locks, max_size=4), st.frozensets(_locks, max_size=4))
def test_guarded_intersection_symmetric(a, b):
    assert guarded_intersection(a, b) == guarded_intersection(b, a)
    assert guarded_intersection(a, b) <= {l.address for l in a} & {l.address for l in b}


def test_lockset_transfer_ignores_other_statements():
    ph = _phase("int x; int main() { x = 1; return 0; }")
    ta = ph.threads
    (c,) = _ctxs(ph, "main", 1)
    L = frozenset({M})
    assert lockset_transfer(ta.backend, ta.results["main"], c, L, ph.program.stmts[c.stmt]) == {L}


# -- active threads --------------------------------------------------------------


def test_single_thread_active_sets():
    ph = _phase("int x; int main() { x = 1; return 0; }")
    (c,) = _ctxs(ph, "main", 1)
    assert ph.active.sets(c) == {frozenset()}


def test_fig4_parallel():
    ph = _phase((CORPUS / "fig4_escaping_local.c").read_text())
    (a,) = _ctxs(ph, "t1", 5)
    (b,) = [c for c in ph.threads.backend.contexts(ph.threads.results["t2"])
            if isinstance(ph.program.stmts[c.stmt], Assign)][:1]
    assert ph.active.may_parallel(a, b) and ph.active.must_parallel(a, b)


def test_before_create_not_parallel():
    src = """
    int x;
    void *t(void *a) { x = 2; return NULL; }
    int main() {
      x = 1;
      create(t);
      return 0; }
    """
    ph = _phase(src)
    (m,) = _ctxs(ph, "main", 5)
    (c,) = _ctxs(ph, "t", 3)
    assert not ph.active.may_parallel(m, c)


def test_non_unique_self_parallel():
    ph = _phase((CORPUS / "fig5a_alloc_in_child.c").read_text())
    cs = [c for c in ph.threads.backend.contexts(ph.threads.results["t2"]) if ph.threads.backend.reachable(ph.threads.results["t2"], c)]
    assert any(ph.active.may_parallel(c, c) for c in cs)


JOIN = """
int x;
void *t1(void *a) { x = 1; return NULL; }
void *t2(void *a) { x = 2; return NULL; }
int main() { pthread_t a, b;
  pthread_create(&a, NULL, t1, NULL);
  pthread_join(a, NULL);
  pthread_create(&b, NULL, t2, NULL);
  return 0; }
"""


def test_join_resolves_and_removes():
    ph = _phase(JOIN)
    (join,) = [s for s in ph.program.stmts.values() if isinstance(s, Call) and s.role == "join"]
    assert resolve_thread_id(ph.program, ph.threads.graph, join) == {"t1"}
    (c1,) = _ctxs(ph, "t1", 3)
    (c2,) = _ctxs(ph, "t2", 4)
    assert not ph.active.may_parallel(c1, c2)


def test_join_on_different_expression_is_noop():
    src = (JOIN.replace("pthread_t a, b;", "pthread_t ids[2]; int i = 0; int j = 1;")
           .replace("&a,", "&ids[j],").replace("&b,", "&ids[j],").replace("join(a,", "join(ids[i],"))
    ph = _phase(src)
    (join,) = [s for s in ph.program.stmts.values() if isinstance(s, Call) and s.role == "join"]
    assert resolve_thread_id(ph.program, ph.threads.graph, join) == frozenset()
    (c1,) = _ctxs(ph, "t1", 3)
    (c2,) = _ctxs(ph, "t2", 4)
    assert ph.active.may_parallel(c1, c2)


def test_create_loop_unfolded():
    src = """
    int x;
    void *t(void *a) { x = 1; return NULL; }
    int main() { int i = 0;
      while (i < __VERIFIER_nondet_int()) { create(t); i++; }
      x = 2;
      return 0; }
    """
    ph = _phase(src)
    (after,) = _ctxs(ph, "main", 6)
    sets = ph.active.sets(after)
    assert any("t" in A for A in sets) and any("t" not in A for A in sets)
    (child,) = _ctxs(ph, "t", 3)
    assert ph.active.may_parallel(after, child)
    assert not ph.active.must_parallel(after, child)


# -- invariants over the corpus --------------------------------------------------------


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_must_within_may(path):
    p = parse_program(path.read_text())
    ph = analyse_mode(p, "under", RunConfig(mode="under"))
    b = ph.threads.backend
    ctxs = [c for t, r in ph.threads.results.items() for c in b.contexts(r)]
    for c in ctxs:
        la = ph.locksets[c.thread]
        assert la.must_ls(c) <= la.may_ls(c)
    for c1 in ctxs[::7]:
        for c2 in ctxs[::5]:
            if ph.active.must_parallel(c1, c2):
                assert ph.active.may_parallel(c1, c2)


def test_format_locksets_stable():
    ph = _phase((CORPUS / "fig5b_atomic_restore.c").read_text())
    a = format_locksets(ph.program, ph.locksets)
    assert a == format_locksets(ph.program, ph.locksets)
    assert "must={L}" in a
