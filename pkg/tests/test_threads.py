import pytest

from helpers import CORPUS, _contains, corpus_files
from racerlite.absdomain import AbstractState, IntIv, Pointers, decl_base, leq_state
from racerlite.backends import make_backend
from racerlite.backends.base import initial_globals
from racerlite.frontend import make_extensive, parse_program, unfold_loops
from racerlite.oracle import enumerate as explore
from racerlite.threads import (
    Solver,
    ThreadGraph,
    build_thread_analysis,
    construct_equations,
    solve_equations,
    uniqueness,
)


def _analyse(src, mode="under", backend="interp"):
    p = parse_program(src)
    q = unfold_loops(p, 1) if mode == "under" else make_extensive(p)
    return build_thread_analysis(q, initial_globals(q), mode, make_backend(backend, q))


def test_fig4_graph_and_args():
    ta = _analyse((CORPUS / "fig4_escaping_local.c").read_text())
    assert ta.graph.vertices == {"main", "t1", "t2"}
    assert {(a, c) for a, _, c in ta.graph.edges} == {("main", "t1"), ("main", "t2")}
    for t in ("t1", "t2"):
        formal = decl_base(ta.program.functions[t].formals[0])
        v = ta.init[t].get(formal)
        assert isinstance(v, Pointers) and {str(a.base) for a in v.addrs} == {"main::data"}
    assert ta.unique == {"main": True, "t1": True, "t2": True}


def test_no_creates():
    ta = _analyse("int g; int main() { g = 1; return 0; }")
    assert ta.graph.vertices == {"main"} and not ta.graph.edges
    assert ta.iterations == 1
    assert ta.per_entry_calls == {"main": 1}


def test_fig5a_uniqueness():
    ta = _analyse((CORPUS / "fig5a_alloc_in_child.c").read_text())
    assert ta.unique["t1"] and not ta.unique["t2"]


@pytest.mark.parametrize(
    "src,expected",
    [
        ("void *t(void *a) { return NULL; } int main() { int i; for (i = 0; i < 3; i++) create(t); return 0; }", False),
        ("void *t(void *a) { return NULL; } void spawn() { create(t); }"
         " int main() { spawn(); spawn(); return 0; }", False),
        ("void *t(void *a) { return NULL; } void spawn() { create(t); } int main() { spawn(); return 0; }", True),
    ],
)
def test_uniqueness_rules(src, expected):
    ta = _analyse(src)
    assert ta.unique["t"] is expected


def test_descendants_of_non_unique_are_non_unique():
    src = """
    void *leaf(void *a) { return NULL; }
    void *mid(void *a) { create(leaf); return NULL; }
    int main() { create(mid); create(mid); return 0; }
    """
    ta = _analyse(src)
    assert not ta.unique["mid"] and not ta.unique["leaf"]


def test_recursive_creation_is_non_unique():
    src = "void *t(void *a) { create(t); return NULL; } int main() { create(t); return 0; }"
    ta = _analyse(src)
    assert not ta.unique["t"]
    assert not ta.graph.is_acyclic()


def test_under_chain_analysed_once():
    src = """
    int g;
    void *c(void *a) { g = 3; return NULL; }
    void *b(void *a) { create(c); return NULL; }
    int main() { create(b); return 0; }
    """
    ta = _analyse(src)
    assert ta.graph.is_acyclic()
    for calls in ta.per_iteration_calls:
        assert all(n <= 1 for n in calls.values())
    assert ta.per_iteration_calls[-1] == {"main": 0, "b": 0, "c": 1} or sum(ta.per_iteration_calls[-1].values()) <= 3


def test_under_child_writes_not_propagated():
    src = "int w = 5; void *t(void *a) { w = 7; return NULL; } int main() { create(t); return 0; }"
    ta = _analyse(src)
    w = decl_base(ta.program.global_decl("w"))
    assert ta.init["t"].get(w) == IntIv(5, 5)


def test_over_fig5b_initial_state():
    p = parse_program((CORPUS / "fig5b_atomic_restore.c").read_text())
    q = make_extensive(p)
    ta = build_thread_analysis(q, initial_globals(q), "over", make_backend("interp", q))
    g = decl_base(q.global_decl("g"))
    assert ta.init["thread"].get(g) == IntIv(0, 2)


def test_over_init_extensive_across_sweeps():
    p = make_extensive(parse_program((CORPUS / "counter_unlocked.c").read_text()))
    backend = make_backend("interp", p)
    full = build_thread_analysis(p, initial_globals(p), "over", backend)
    eqs = construct_equations(full.graph, "over", initial_globals(p))
    solver = Solver(p, backend)
    prev = {t: AbstractState.unreachable() for t in full.graph.vertices}
    prev["main"] = initial_globals(p)
    for _ in range(4):
        nxt, _ = solve_equations(eqs, prev, solver, max_sweeps=10_000)
        for t in full.graph.vertices:
            assert leq_state(prev[t], nxt[t])
        prev = nxt


def test_unreachable_thread_skipped():
    src = "void *t(void *a) { return NULL; } int main() { if (0) create(t); return 0; }"
    ta = _analyse(src)
    assert ta.graph.vertices == {"main"}


def test_dot_output():
    ta = _analyse((CORPUS / "fig5a_alloc_in_child.c").read_text())
    dot = ta.dot()
    assert dot.startswith("digraph")
    assert '"main" -> "t2"' in dot or "main -> t2" in dot


def test_thread_graph_helpers():
    g = ThreadGraph({"main", "a", "b"}, {("main", 1, "a"), ("a", 2, "b")})
    assert g.topological_order() == ["main", "a", "b"]
    assert g.descendants("main") == {"a", "b"}
    assert g.children("a") == {"b"}
    assert uniqueness(parse_program("int main() { return 0; }"), ThreadGraph({"main"}, set())) == {"main": True}


def _globals_ok(path):
    """Over-mode initial states contain every concrete global value the
    oracle observes anywhere."""
    p = parse_program(path.read_text())
    q = make_extensive(p)
    ta = build_thread_analysis(q, initial_globals(q), "over", make_backend("interp", q))
    v = explore(p, snapshots=True)
    bad = []
    for snaps in v.state_sets.values():
        for snap in snaps:
            for key, off, cv in snap:
                if key[0] != "global" or cv is None:
                    continue
                decl = p.global_decl(key[2])
                if decl is None or decl.thread_local:
                    continue
                b = decl_base(decl)
                for t, init in ta.init.items():
                    if init.reachable and not _contains(init.get(b), cv, off):
                        bad.append((path.name, t, key, cv))
    return bad


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_over_init_sound_against_oracle(path):
    assert _globals_ok(path) == []
