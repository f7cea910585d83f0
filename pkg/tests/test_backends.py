import pytest

from helpers import CORPUS
from racerlite.absdomain import (
    TOP,
    TOP_INT,
    Address,
    AbstractState,
    Base,
    IntIv,
    Pointers,
    decl_base,
)
from racerlite.backends import BACKENDS, make_backend
from racerlite.backends.alias import UnionFind, steensgaard_saturate
from racerlite.backends.base import Context, initial_globals, push_call
from racerlite.frontend import parse_program
from racerlite.frontend.ctypes import INT
from racerlite.frontend.ir import Assign, Call


def _setup(src, backend="interp", thread="main", init=None, depth=1):
    p = parse_program(src)
    b = make_backend(backend, p, depth)
    r = b.analyse_thread(thread, init if init is not None else initial_globals(p))
    return p, b, r


def _at(p, b, r, line, kind=None):
    out = [c for c in b.contexts(r) if p.stmts[c.stmt].line == line and (kind is None or isinstance(p.stmts[c.stmt], kind))]
    assert out, f"no context at line {line}"
    return out


def _g(p, name="g"):
    return decl_base(p.global_decl(name))


FIG5B = (CORPUS / "fig5b_atomic_restore.c").read_text()
FIG4 = (CORPUS / "fig4_escaping_local.c").read_text()


# -- interp -------------------------------------------------------------------


def test_interp_fig5b_main_states():
    p = parse_program(FIG5B)
    b = make_backend("interp", p)
    g = _g(p)
    r = b.analyse_thread("main", AbstractState({g: IntIv(1, 1)}))
    stmts = _at(p, b, r, 15, Assign)
    first, second = sorted(stmts, key=lambda c: c.stmt)
    assert b.state(r, first).get(g) == IntIv(1, 1)
    assert b.state(r, second).get(g) == IntIv(0, 0)
    (ret,) = _at(p, b, r, 16)
    assert b.state(r, ret).get(g) == IntIv(1, 1)


def test_interp_trivial_thread():
    p, b, r = _setup("void *t(void *a) { return NULL; } int main() { return 0; }", thread="t")
    init = initial_globals(p)
    reach = [c for c in b.contexts(r) if b.reachable(r, c)]
    assert all(b.state(r, c).values.items() >= init.values.items() for c in reach)


def test_interp_dead_branch_unreachable():
    p, b, r = _setup("int g; int main() { g = 1; if (g == 2) g = 3; return 0; }")
    (sid,) = [s.sid for s in p.stmts.values() if str(s).startswith("g = 3")]
    dead = Context("main", (), sid)
    assert dead not in b.contexts(r)
    assert not b.reachable(r, dead)
    assert not b.state(r, dead).reachable
    assert not b.accesses(r, dead, p.stmts[sid]).writes


def test_interp_value_ptr_two_targets():
    src = """
    pthread_mutex_t m1, m2; pthread_mutex_t *p;
    int main() { if (__VERIFIER_nondet_int()) p = &m1; else p = &m2;
      pthread_mutex_lock(p);
      return 0; }
    """
    p, b, r = _setup(src)
    (c,) = _at(p, b, r, 4, Call)
    call = p.stmts[c.stmt]
    names = {a.base.name for a in b.value_ptr(r, c, call.args[0])}
    assert names == {"m1", "m2"}


def test_interp_function_pointers():
    src = """
    void *t1(void *a) { return NULL; } void *t2(void *a) { return NULL; }
    void *(*fp)(void *);
    int main() { if (__VERIFIER_nondet_int()) fp = t1; else fp = t2;
      create(fp);
      return 0; }
    """
    p, b, r = _setup(src)
    (c,) = _at(p, b, r, 5, Call)
    assert b.functions(r, c, p.stmts[c.stmt].args[0]) == {"t1", "t2"}


def test_interp_surely_invalid_access():
    p = parse_program((CORPUS / "fig5a_alloc_in_child.c").read_text())
    b = make_backend("interp", p)
    g = _g(p)
    from racerlite.absdomain import NULL

    r = b.analyse_thread("t2", AbstractState({g: NULL}))
    (c,) = _at(p, b, r, 10, Assign)
    pair = b.accesses(r, c, p.stmts[c.stmt])
    assert not pair.writes
    assert {a.base.name for a in pair.reads} == {"g"}


def test_interp_queries_deterministic():
    p = parse_program(FIG4)
    b = make_backend("interp", p)
    r = b.analyse_thread("main", initial_globals(p))
    for c in b.contexts(r):
        s = p.stmts[c.stmt]
        assert b.accesses(r, c, s) == b.accesses(r, c, s)
        assert b.state(r, c) == b.state(r, c)


def test_context_depth_bound():
    src = """
    int g;
    void inner() { g = 1; }
    void mid() { inner(); }
    void outer() { mid(); }
    int main() { outer(); mid(); return 0; }
    """
    for depth in (0, 1, 2):
        p, b, r = _setup(src, depth=depth)
        assert all(len(c.calls) <= depth for c in b.contexts(r))
    def inner_contexts(depth):
        p, b, r = _setup(src, depth=depth)
        return {c.calls for c in b.contexts(r) if p.stmts[c.stmt].fn == "inner"}

    assert len(inner_contexts(1)) == 1  # both paths end in the same mid>inner call
    assert len(inner_contexts(2)) == 2  # the two mid call sites stay apart
    assert push_call(((1, "a"),), 2, "b", 1) == ((2, "b"),)
    assert push_call((), 2, "b", 0) == ()


def test_recursion_terminates():
    src = "int g; void f(int n) { if (n > 0) { g = n; f(n - 1); } } int main() { f(5); return 0; }"
    p, b, r = _setup(src)
    writes = [c for c in b.contexts(r) if str(p.stmts[c.stmt]).startswith("g = n") and b.reachable(r, c)]
    assert writes


# -- syntactic ------------------------------------------------------------------


def test_syntactic_is_top():
    p, b, r = _setup(FIG4, "syntactic")
    for c in b.contexts(r):
        assert b.state(r, c) == AbstractState.top()
        s = p.stmts[c.stmt]
        if isinstance(s, Assign):
            assert b.value(r, c, s.rhs) is TOP


def test_syntactic_lock_target():
    src = "pthread_mutex_t m; int main() { pthread_mutex_lock(&m); pthread_mutex_unlock(&m); return 0; }"
    p, b, r = _setup(src, "syntactic")
    (c,) = _at(p, b, r, 1, Call)[:1]
    assert b.value_ptr(r, c, p.stmts[c.stmt].args[0]) == {Address(_g(p, "m"), IntIv(0, 0))}


def test_syntactic_thread_signature_filter():
    src = """
    void *t1(void *a) { return NULL; }
    int helper(int x) { return x; }
    void *(*fp)(void *); int (*gp)(int);
    int main() { fp = t1; gp = helper;
      create(fp);
      return 0; }
    """
    p, b, r = _setup(src, "syntactic")
    (c,) = _at(p, b, r, 6, Call)
    assert b.functions(r, c, p.stmts[c.stmt].args[0]) == {"t1"}


def test_syntactic_direct_name():
    p, b, r = _setup(FIG4, "syntactic")
    c = _at(p, b, r, 15, Call)[0]
    assert b.functions(r, c, p.stmts[c.stmt].args[0]) == {"t1"}


def test_syntactic_write_of_global():
    p, b, r = _setup("int g; int main() { g = 0; return 0; }", "syntactic")
    (c,) = _at(p, b, r, 1, Assign)
    pair = b.accesses(r, c, p.stmts[c.stmt])
    assert not pair.reads
    assert {a.base.name for a in pair.writes} == {"g"}


def test_syntactic_unknown_deref():
    p, b, r = _setup(FIG4, "syntactic", thread="t1")
    (c,) = _at(p, b, r, 5, Assign)
    pair = b.accesses(r, c, p.stmts[c.stmt])
    assert {a.base.kind for a in pair.writes} == {"unknown"}


# -- alias ------------------------------------------------------------------------


def test_alias_fig4_accesses():
    p = parse_program(FIG4)
    b = make_backend("alias", p)
    main = b.analyse_thread("main", initial_globals(p))
    c = _at(p, b, main, 15, Call)[0]
    data = Address(Base("local", "data", "main"), IntIv(0, 0))
    arg = p.stmts[c.stmt].args[1]
    init = AbstractState({decl_base(p.functions["t1"].formals[0]): Pointers(frozenset(b.value_ptr(main, c, arg)))})
    r = b.analyse_thread("t1", init)
    (c,) = _at(p, b, r, 5, Assign)
    pair = b.accesses(r, c, p.stmts[c.stmt])
    assert {a.base for a in pair.writes} == {data.base}
    assert {str(a.base) for a in pair.reads} == {"main::data", "t1::x"}
    uf = b.uf
    assert uf.pts(uf.node(Base("local", "x", "t1"))) == uf.pts(uf.node(Base("formal", "arg1", "t1")))


def test_alias_value_is_top():
    p, b, r = _setup(FIG4, "alias")
    for c in b.contexts(r):
        s = p.stmts[c.stmt]
        if isinstance(s, Assign):
            assert b.value(r, c, s.rhs) is TOP


def test_alias_chain():
    src = "int a; int *p; int *q; int main() { p = &a; q = p; *q = 1; return 0; }"
    p, b, r = _setup(src, "alias")
    uf = b.uf
    assert uf.pts(uf.node(_g(p, "p"))) == uf.pts(uf.node(_g(p, "q")))
    assert _g(p, "a") in uf.class_members(uf.pts(uf.node(_g(p, "q"))))
    (c,) = [c for c in b.contexts(r) if str(p.stmts[c.stmt]).startswith("*q")]
    pair = b.accesses(r, c, p.stmts[c.stmt])
    assert {a.base.name for a in pair.writes} == {"a"}


def test_saturate_unifies_and_noop():
    uf = UnionFind()
    arg1, arg2 = Base("formal", "arg1", "t1"), Base("formal", "arg2", "t2")
    data = Base("local", "data", "main", ty=INT)
    steensgaard_saturate(uf, [(arg1, Address(data)), (arg2, Address(data))])
    assert uf.pts(uf.node(arg1)) == uf.pts(uf.node(arg2))
    assert data in uf.class_members(uf.pts(uf.node(arg1)))
    before = (list(uf.parent), dict(uf.pointee))
    steensgaard_saturate(uf, [])
    assert (list(uf.parent), dict(uf.pointee)) == before


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_every_backend_answers_every_context(name):
    p, b, r = _setup(FIG4, name)
    for c in b.contexts(r):
        s = p.stmts[c.stmt]
        b.accesses(r, c, s)
        b.state(r, c)
    assert all(c.thread == "main" for c in b.contexts(r))


def test_unknown_backend():
    with pytest.raises(ValueError):
        make_backend("nope", parse_program("int main() { return 0; }"))


def test_top_int_is_unbounded():
    assert TOP_INT.lo < 0 < TOP_INT.hi
