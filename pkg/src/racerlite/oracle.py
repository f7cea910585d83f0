"""Bounded explicit-state exploration of thread interleavings.

Used as ground truth: every interleaving of statement-level steps is explored
under sequential consistency (up to the bounds), and a race is flagged when two
threads can execute conflicting accesses one right after the other.
Non-deterministic values range over {0, 1}.

Steps that touch only private data (unescaped locals, thread-local storage)
are independent of every other thread, so by default such a step is taken
without considering the other threads at that point.

In ``single_threaded`` mode a created thread does not run alongside its
parent: it starts a separate sequential run on a copy of the parent's memory
at the create point, which is the semantics the under-approximating thread
analysis abstracts.
"""

from __future__ import annotations

import builtins
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .backends.syntactic import address_taken
from .frontend.ctypes import ArrayType, FunctionType, IntType, PointerType, element_type, pointee_size
from .frontend.ir import (
    AddrOf,
    Alloc,
    Assign,
    Binary,
    Call,
    Cast,
    Cond,
    Const,
    Deref,
    Expr,
    Free,
    GuardedCall,
    If,
    Index,
    IRProgram,
    Nondet,
    NondetAssign,
    Return,
    Skip,
    Stmt,
    Unary,
    Var,
)

log = logging.getLogger(__name__)

EBUSY = 16
NULLP = ("p", None, 0)

BaseKey = Tuple
RaceKey = Tuple[FrozenSet[int], BaseKey]


@dataclass(frozen=True)
class Bounds:
    max_steps: int = 200
    max_threads: int = 8
    max_states: int = 200_000


@dataclass
class OracleVerdict:
    races: Set[RaceKey] = field(default_factory=set)
    race_lines: Dict[RaceKey, Tuple[int, int]] = field(default_factory=dict)
    state_sets: Dict[Tuple[str, int], Set[FrozenSet]] = field(default_factory=dict)
    exhausted: bool = True
    states: int = 0

    @property
    def racy(self) -> bool:
        return bool(self.races)

    @property
    def race_bases(self) -> Set[BaseKey]:
        return {b for _, b in self.races}

    def to_dict(self) -> dict:
        races = sorted(
            ({"statements": sorted(s), "base": list(map(_jsonable, b)), "lines": list(self.race_lines.get((s, b), ()))}
             for s, b in self.races),
            key=lambda d: (d["statements"], str(d["base"])),
        )
        return {"race": bool(self.races), "races": races, "exhausted": self.exhausted, "states": self.states}


def _jsonable(x):
    return x if isinstance(x, (int, str)) or x is None else str(x)


# --------------------------------------------------------------------------
# configurations


@dataclass
class ObjMeta:
    key: BaseKey
    label: str
    atomic: bool
    private: bool


@dataclass
class Frame:
    fn: str
    node: int
    fid: int
    lhs: Optional[Expr] = None  # caller lvalue receiving the return value
    ret: object = None

    def frozen(self):
        return (self.fn, self.node, self.fid, self.lhs, self.ret)


@dataclass
class Thread:
    tid: int
    entry: str
    frames: List[Frame]

    @property
    def done(self) -> bool:
        return not self.frames

    def frozen(self):
        return (self.tid, self.entry, tuple(f.frozen() for f in self.frames))


class Config:
    def __init__(self):
        self.mem: Dict[tuple, Dict[int, object]] = {}
        self.meta: Dict[tuple, ObjMeta] = {}
        self.threads: List[Thread] = []
        self.locks: Dict[tuple, Tuple[str, FrozenSet[int]]] = {}
        self.next_id = 1
        self.halted = False

    def copy(self) -> "Config":
        c = Config.__new__(Config)
        c.mem = {k: dict(v) for k, v in self.mem.items()}
        c.meta = dict(self.meta)
        c.threads = [Thread(t.tid, t.entry, [Frame(f.fn, f.node, f.fid, f.lhs, f.ret) for f in t.frames]) for t in self.threads]
        c.locks = dict(self.locks)
        c.next_id = self.next_id
        c.halted = self.halted
        return c

    def fresh(self) -> int:
        n = self.next_id
        self.next_id += 1
        return n

    def frozen(self):
        return (
            frozenset((k, frozenset(v.items())) for k, v in self.mem.items()),
            tuple(t.frozen() for t in self.threads),
            frozenset(self.locks.items()),
            self.halted,
        )


class Blocked(Exception):
    pass


class Stuck(Exception):
    """The step has undefined behaviour (invalid dereference, division by
    zero): the trace ends here."""


class NeedChoice(Exception):
    pass


@dataclass
class AccessRec:
    obj: tuple
    off: int
    size: int
    kind: str
    atomic: bool


class _Step:
    """One step of one thread, replaying a fixed sequence of choices."""

    def __init__(self, ex: "Explorer", cfg: Config, thread: Thread, choices: List[int]):
        self.ex = ex
        self.p = ex.p
        self.cfg = cfg
        self.t = thread
        self.choices = choices
        self.used = 0
        self.accesses: List[AccessRec] = []
        self.record = True
        self.spawned: List[Config] = []
        self.visible = False

    # -- choices ------------------------------------------------------------
    def choose(self) -> int:
        if self.used >= len(self.choices):
            raise NeedChoice()
        v = self.choices[self.used]
        self.used += 1
        return v

    # -- memory -------------------------------------------------------------
    @property
    def frame(self) -> Frame:
        return self.t.frames[-1]

    def var_obj(self, v: Var) -> tuple:
        if v.scope == "global":
            d = self.ex.globals[v.name]
            if d.thread_local:
                return ("tls", v.name, self.t.tid)
            return ("g", v.name)
        for f in reversed(self.t.frames):
            if f.fn == v.fn:
                return ("f", f.fid, v.name)
        raise Stuck(f"no frame for {v}")

    def access(self, obj, off, size, kind, atomic=False):
        if not self.record:
            return
        meta = self.cfg.meta.get(obj)
        if meta is None:
            return
        self.accesses.append(AccessRec(obj, off, size or 1, kind, atomic or meta.atomic))
        if not meta.private:
            self.visible = True

    def load(self, obj, off):
        cells = self.cfg.mem.get(obj)
        if cells is None:
            raise Stuck("access to freed or unknown memory")
        return cells.get(off, self.ex.default(obj))

    def store(self, obj, off, v):
        cells = self.cfg.mem.get(obj)
        if cells is None:
            raise Stuck("access to freed or unknown memory")
        cells[off] = v

    # -- evaluation ---------------------------------------------------------
    def lval(self, e: Expr) -> Tuple[tuple, int]:
        """Address of an lvalue; records the reads its operands perform."""
        if isinstance(e, Cast):
            return self.lval(e.operand)
        if isinstance(e, Var):
            return self.var_obj(e), 0
        if isinstance(e, Deref):
            ptr = self.rval(e.operand)
            return _addr(ptr)
        if isinstance(e, Index):
            if isinstance(e.base.ty, ArrayType):
                obj, off = self.lval(e.base)
            else:
                obj, off = _addr(self.rval(e.base))
            i = self.rval(e.index)
            if not isinstance(i, int):
                raise Stuck("non-integer index")
            return obj, off + i * (e.ty.size() or 1)
        raise Stuck(f"not an lvalue: {e}")

    def read(self, e: Expr):
        obj, off = self.lval(e)
        self.access(obj, off, e.ty.size(), "read")
        return self.load(obj, off)

    def write(self, e: Expr, v, atomic=False):
        obj, off = self.lval(e)
        self.access(obj, off, e.ty.size(), "write", atomic)
        self.store(obj, off, _convert(v, e.ty))

    def rval(self, e: Expr):
        if isinstance(e, Const):
            return NULLP if e.ty.is_pointer and e.value == 0 else e.value
        if isinstance(e, Var):
            if e.scope == "func":
                return ("fn", e.name)
            if isinstance(e.ty, ArrayType):
                return ("p", self.var_obj(e), 0)
            return _norm(self.read(e))
        if isinstance(e, Nondet):
            return self.choose()
        if isinstance(e, (Deref, Index)):
            if isinstance(e.ty, ArrayType):
                obj, off = self.lval(e)
                return ("p", obj, off)
            if isinstance(e.ty, FunctionType):
                return self.rval(e.operand) if isinstance(e, Deref) else NULLP
            return _norm(self.read(e))
        if isinstance(e, AddrOf):
            if isinstance(e.operand, Var) and e.operand.scope == "func":
                return ("fn", e.operand.name)
            obj, off = self.lval(e.operand)
            return ("p", obj, off)
        if isinstance(e, Cast):
            v = self.rval(e.operand)
            if isinstance(e.ty, IntType) and isinstance(v, int):
                return _wrap(v, e.ty)
            if e.ty.is_pointer and v == 0:
                return NULLP
            return v
        if isinstance(e, Unary):
            v = self.rval(e.operand)
            if e.op == "!":
                return 0 if _truth(v) else 1
            if not isinstance(v, int):
                raise Stuck("arithmetic on a pointer")
            r = {"-": -v, "+": v, "~": ~v}[e.op]
            return _wrap(r, e.ty) if isinstance(e.ty, IntType) else r
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Cond):
            return self.rval(e.then) if _truth(self.rval(e.test)) else self.rval(e.other)
        raise Stuck(f"cannot evaluate {e}")

    def binary(self, e: Binary):
        if e.op == "&&":
            return 1 if _truth(self.rval(e.left)) and _truth(self.rval(e.right)) else 0
        if e.op == "||":
            return 1 if _truth(self.rval(e.left)) or _truth(self.rval(e.right)) else 0
        a, b = self.rval(e.left), self.rval(e.right)
        if e.op in ("==", "!="):
            eq = _norm(a) == _norm(b)
            return int(eq if e.op == "==" else not eq)
        if isinstance(a, tuple) or isinstance(b, tuple):
            if a == 0:
                a = NULLP
            if b == 0:
                b = NULLP
            if e.op in ("+", "-") and isinstance(a, tuple) and isinstance(b, int):
                if a[0] != "p" or a[1] is None:
                    raise Stuck("arithmetic on a null pointer")
                d = b * pointee_size(e.ty)
                return ("p", a[1], a[2] + d if e.op == "+" else a[2] - d)
            if e.op == "-" and isinstance(a, tuple) and isinstance(b, tuple) and a[1] == b[1]:
                return (a[2] - b[2]) // pointee_size(e.left.ty)
            if e.op in ("<", "<=", ">", ">=") and isinstance(a, tuple) and isinstance(b, tuple) and a[1] == b[1]:
                return int(_cmp(e.op, a[2], b[2]))
            raise Stuck("unsupported pointer operation")
        if e.op in ("<", "<=", ">", ">="):
            return int(_cmp(e.op, a, b))
        if e.op in ("/", "%"):
            if b == 0:
                raise Stuck("division by zero")
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            r = q if e.op == "/" else a - b * q
        elif e.op in ("<<", ">>"):
            if b < 0 or b >= 64:
                raise Stuck("bad shift")
            r = a << b if e.op == "<<" else a >> b
        else:
            r = {"+": a + b, "-": a - b, "*": a * b, "&": a & b, "|": a | b, "^": a ^ b}[e.op]
        return _wrap(r, e.ty) if isinstance(e.ty, IntType) else r

    # -- statements ---------------------------------------------------------
    def run(self):
        """Execute the next statement of the thread (mutates ``cfg``)."""
        f = self.frame
        fn = self.p.functions[f.fn]
        s = self.p.stmts[f.node]
        nxt = fn.succ[f.node]
        if f.node == fn.exit:
            self.pop()
            return
        if isinstance(s, Skip):
            f.node = nxt[0]
        elif isinstance(s, Assign):
            self.write(s.lhs, self.rval(s.rhs))
            f.node = nxt[0]
        elif isinstance(s, NondetAssign):
            if self.choose():
                self.write(s.lhs, self.rval(s.rhs))
            f.node = nxt[0]
        elif isinstance(s, Alloc):
            if not (s.keep_old and self.choose()):
                size = self.rval(s.size)
                self.write(s.lhs, ("p", self.ex.new_heap(self.cfg, s, size if isinstance(size, int) else 0), 0))
            f.node = nxt[0]
        elif isinstance(s, Free):
            self.rval(s.ptr)
            f.node = nxt[0]
        elif isinstance(s, If):
            f.node = nxt[0] if _truth(self.rval(s.cond)) else nxt[1]
        elif isinstance(s, Return):
            if s.value is not None:
                f.ret = _convert(self.rval(s.value), self.p.functions[f.fn].ftype.ret)
            f.node = nxt[0]
        elif isinstance(s, Call):
            if isinstance(s, GuardedCall) and self.choose():
                f.node = nxt[0]
                return
            self.call(s, nxt[0])
        else:
            raise Stuck(f"unsupported statement {s}")

    def pop(self):
        f = self.t.frames.pop()
        self.visible = self.visible or not self.t.frames
        if not self.t.frames:
            if self.t.entry == "main" and self.t.tid == 0:
                self.cfg.halted = True
            return
        for obj in [o for o in self.cfg.mem if o[0] == "f" and o[1] == f.fid]:
            del self.cfg.mem[obj]
        if f.lhs is not None:
            self.write(f.lhs, f.ret if f.ret is not None else 0)

    def call(self, s: Call, after: int):
        f = self.frame
        if s.role is not None:
            self.visible = True
            getattr(self, "role_" + s.role)(s, after)
            return
        if isinstance(s.callee, Var) and s.callee.scope == "func":
            target = s.callee.name
        else:
            v = self.rval(s.callee)
            if not (isinstance(v, tuple) and v[0] == "fn"):
                raise Stuck("call through a non-function pointer")
            target = v[1]
        args = [self.rval(a) for a in s.args]
        if target not in self.p.functions:
            if s.lhs is not None:
                self.write(s.lhs, self.t.tid + 1 if target == "pthread_self" else 0)
            f.node = after
            return
        g = self.p.functions[target]
        if len(g.formals) != len(args):
            raise Stuck("arity mismatch")
        f.node = after
        self.push(target, args, s.lhs)

    def push(self, fn: str, args, lhs=None):
        g = self.p.functions[fn]
        fid = self.cfg.fresh()
        nf = Frame(fn, g.entry, fid, lhs)
        self.t.frames.append(nf)
        for d in list(g.formals) + list(g.locals.values()):
            obj = ("f", fid, d.name)
            self.cfg.mem[obj] = {}
            self.cfg.meta[obj] = ObjMeta((d.scope, fn, d.name), f"{fn}::{d.name}", d.atomic,
                                         (d.scope, fn, d.name) not in self.ex.taken)
        for d, a in zip(g.formals, args):
            self.cfg.mem[("f", fid, d.name)][0] = _convert(a, d.ty)

    # -- concurrency --------------------------------------------------------
    def _fn_arg(self, e: Expr) -> Optional[str]:
        saved, self.record = self.record, False
        try:
            if isinstance(e, Var) and e.scope == "func":
                return e.name
            v = self.rval(e)
        finally:
            self.record = saved
        return v[1] if isinstance(v, tuple) and v[0] == "fn" else None

    def quiet(self, e: Expr):
        saved, self.record = self.record, False
        try:
            return self.rval(e)
        finally:
            self.record = saved

    def role_create(self, s: Call, after: int):
        b = s.binding
        entry = self._fn_arg(s.args[b.entry])
        arg = self.quiet(s.args[b.arg]) if b.arg is not None and b.arg < len(s.args) else NULLP
        self.frame.node = after
        if entry is None or entry not in self.p.functions:
            raise Stuck("create with an unknown entry point")
        if len(self.cfg.threads) + len(self.spawned) >= self.ex.bounds.max_threads:
            self.ex.exhausted = False
            raise Stuck("thread bound reached")
        tid = self.ex.next_tid(self.cfg)
        if b.tid is not None and b.tid != b.entry:
            target = self.quiet(s.args[b.tid])
            obj, off = _addr(target)
            self.store(obj, off, tid + 1)
        if s.lhs is not None:
            self.write(s.lhs, 0)
        g = self.p.functions[entry]
        args = [arg][: len(g.formals)]
        if len(g.formals) > len(args):
            args += [NULLP] * (len(g.formals) - len(args))
        if self.ex.single_threaded:
            child = self.cfg.copy()
            child.threads = []
            child.halted = False
            child.locks = {}
            nt = Thread(tid, entry, [])
            child.threads.append(nt)
            _Step(self.ex, child, nt, []).push(entry, args)
            self.spawned.append(child)
        else:
            nt = Thread(tid, entry, [])
            self.cfg.threads.append(nt)
            _Step(self.ex, self.cfg, nt, []).push(entry, args)

    def role_join(self, s: Call, after: int):
        b = s.binding
        e = s.args[b.tid]
        if not self.ex.single_threaded:
            name = self._fn_arg(e) if isinstance(e, Var) and e.scope == "func" else None
            if name is not None:
                waiting = [t for t in self.cfg.threads if t.entry == name and not t.done]
            else:
                v = self.quiet(e)
                waiting = [t for t in self.cfg.threads if t.tid + 1 == v and not t.done]
            if waiting:
                raise Blocked()
        if s.lhs is not None:
            self.write(s.lhs, 0)
        self.frame.node = after

    def _lock_key(self, s: Call):
        v = self.quiet(s.args[s.binding.lock])
        obj, off = _addr(v)
        return (obj, off)

    def role_lock(self, s: Call, after: int):
        b = s.binding
        key = self._lock_key(s)
        held = self.cfg.locks.get(key)
        me = self.t.tid
        if b.mode == "read":
            free = held is None or held[0] == "read"
        else:
            free = held is None
        if free:
            if b.mode == "read":
                holders = (held[1] if held else frozenset()) | {me}
                self.cfg.locks[key] = ("read", holders)
            else:
                self.cfg.locks[key] = ("excl", frozenset({me}))
            result = b.success if not b.blocking else 0
        elif b.blocking:
            raise Blocked()
        else:
            result = EBUSY
        if s.lhs is not None:
            self.write(s.lhs, result)
        self.frame.node = after

    def role_unlock(self, s: Call, after: int):
        key = self._lock_key(s)
        held = self.cfg.locks.get(key)
        if held is not None:
            rest = held[1] - {self.t.tid}
            if held[0] == "read" and rest:
                self.cfg.locks[key] = ("read", rest)
            else:
                del self.cfg.locks[key]
        if s.lhs is not None:
            self.write(s.lhs, 0)
        self.frame.node = after

    def role_atomic(self, s: Call, after: int):
        name = s.callee.name if isinstance(s.callee, Var) else ""
        args = [self.quiet(a) for a in s.args]
        result = 0
        if args and isinstance(args[0], tuple) and args[0][0] == "p" and args[0][1] is not None:
            obj, off = args[0][1], args[0][2]
            old = _norm(self.load(obj, off))
            op = name.split("atomic_")[-1].rstrip("_n")
            size = 4
            if op in ("load",):
                self.access(obj, off, size, "read", True)
                result = old
            elif op in ("store",) and len(args) > 1:
                self.access(obj, off, size, "write", True)
                self.store(obj, off, args[1])
            elif op in ("fetch_add", "fetch_sub") and len(args) > 1 and isinstance(old, int):
                self.access(obj, off, size, "write", True)
                self.store(obj, off, old + args[1] if op == "fetch_add" else old - args[1])
                result = old
            elif op == "exchange" and len(args) > 1:
                self.access(obj, off, size, "write", True)
                self.store(obj, off, args[1])
                result = old
        if s.lhs is not None:
            self.write(s.lhs, result)
        self.frame.node = after


def _addr(v) -> Tuple[tuple, int]:
    if not (isinstance(v, tuple) and v[0] == "p" and v[1] is not None):
        raise Stuck("invalid dereference")
    return v[1], v[2]


def _norm(v):
    return 0 if v is None else v


def _truth(v) -> bool:
    if isinstance(v, tuple):
        return not (v[0] == "p" and v[1] is None)
    return bool(v)


def _cmp(op, a, b) -> bool:
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def _wrap(v: int, ty: IntType) -> int:
    bits = 8 * ty.nbytes
    v &= (1 << bits) - 1
    if ty.signed and v >= 1 << (bits - 1):
        v -= 1 << bits
    return v


def _convert(v, ty):
    if isinstance(ty, IntType) and isinstance(v, int):
        return _wrap(v, ty)
    if ty.is_pointer and v == 0:
        return NULLP
    return v


# --------------------------------------------------------------------------
# exploration


class Explorer:
    def __init__(self, p: IRProgram, bounds: Bounds = Bounds(), single_threaded: bool = False,
                 reduce: bool = True, snapshots: bool = False):
        self.p = p
        self.bounds = bounds
        self.single_threaded = single_threaded
        self.reduce = reduce
        self.snapshots = snapshots
        self.globals = {d.name: d for d in p.globals}
        self.taken = address_taken(p)
        self.exhausted = True
        self.verdict = OracleVerdict()

    # -- setup ----------------------------------------------------------------
    def default(self, obj):
        return 0 if obj[0] in ("g", "tls") else None

    def next_tid(self, cfg: Config) -> int:
        return cfg.fresh()

    def new_heap(self, cfg: Config, s: Alloc, size: int) -> tuple:
        obj = ("h", cfg.fresh())
        cfg.mem[obj] = {}
        cfg.meta[obj] = ObjMeta(("dynamic", s.origin if s.origin >= 0 else s.sid), f"malloc@{s.fn}:{s.line}", False, False)
        return obj

    def initial(self) -> Config:
        cfg = Config()
        boot = Thread(0, "main", [])
        st = _Step(self, cfg, boot, [])
        st.record = False
        for d in self.p.globals:
            if d.thread_local:
                continue  # one copy per thread, created on demand
            cfg.mem[("g", d.name)] = _zeroed(d.ty)
            cfg.meta[("g", d.name)] = ObjMeta(("global", None, d.name), d.name, d.atomic, False)
        for d in self.p.globals:
            if d.init is not None and not d.thread_local:
                self._init(st, ("g", d.name), 0, d.ty, d.init)
        cfg.threads.append(boot)
        st.push("main", [0] * len(self.p.functions["main"].formals))
        return cfg

    def _init(self, st: _Step, obj, off, ty, init):
        if isinstance(init, (list, tuple)):
            elem = ty.elem if isinstance(ty, ArrayType) else ty
            size = elem.size() or 1
            for i, x in builtins.enumerate(init):
                self._init(st, obj, off + i * size, elem, x)
            return
        try:
            v = st.rval(init)
        except (Stuck, NeedChoice):
            return
        st.cfg.mem[obj][off] = _convert(v, element_type(ty))

    # -- tls objects are created lazily per thread ------------------------------
    def _ensure_tls(self, cfg: Config):
        for d in self.p.globals:
            if not d.thread_local:
                continue
            for t in cfg.threads:
                obj = ("tls", d.name, t.tid)
                if obj not in cfg.mem:
                    cfg.mem[obj] = _zeroed(d.ty)
                    cfg.meta[obj] = ObjMeta(("global", None, d.name), d.name, d.atomic, True)

    # -- one thread's successors -----------------------------------------------
    def successors(self, cfg: Config, i: int):
        """All (config, step) outcomes of thread ``i``'s next statement;
        empty when the thread is blocked."""
        out = []
        pending = [[]]
        while pending:
            ch = pending.pop()
            c = cfg.copy()
            t = c.threads[i]
            st = _Step(self, c, t, ch)
            try:
                st.run()
            except NeedChoice:
                pending += [ch + [1], ch + [0]]
                continue
            except Blocked:
                continue
            except Stuck:
                out.append((None, st))
                continue
            out.append((c, st))
        return out

    def run(self) -> OracleVerdict:
        roots = [self.initial()]
        seen: Dict[object, int] = {}
        while roots:
            root = roots.pop()
            self._ensure_tls(root)
            stack = [(root, 0)]
            while stack:
                cfg, depth = stack.pop()
                key = cfg.frozen()
                if seen.get(key, 1 << 60) <= depth:
                    continue
                seen[key] = depth
                self.verdict.states += 1
                if self.verdict.states > self.bounds.max_states:
                    self.exhausted = False
                    stack.clear()
                    roots.clear()
                    break
                live = [i for i, t in builtins.enumerate(cfg.threads) if not t.done]
                if cfg.halted or not live:
                    continue
                if self.snapshots:
                    self._snapshot(cfg)
                if depth >= self.bounds.max_steps:
                    self.exhausted = False
                    continue
                per_thread = {i: self.successors(cfg, i) for i in live}
                self._check_races(cfg, per_thread)
                order = live
                if self.reduce:
                    for i in live:
                        outs = per_thread[i]
                        if outs and all(not st.visible for _, st in outs):
                            order = [i]
                            break
                for i in order:
                    for nxt, st in per_thread[i]:
                        roots.extend(st.spawned)
                        if nxt is not None:
                            self._ensure_tls(nxt)
                            stack.append((nxt, depth + 1))
        self.verdict.exhausted = self.exhausted
        return self.verdict

    def _check_races(self, cfg: Config, per_thread):
        ids = sorted(per_thread)
        acc = {}
        for i in ids:
            recs = set()
            for _, st in per_thread[i]:
                for a in st.accesses:
                    recs.add((a.obj, a.off, a.size, a.kind, a.atomic))
            acc[i] = recs
        for x in range(len(ids)):
            for y in range(x + 1, len(ids)):
                i, j = ids[x], ids[y]
                for (o1, f1, s1, k1, a1) in acc[i]:
                    for (o2, f2, s2, k2, a2) in acc[j]:
                        if o1 != o2 or (a1 and a2) or "write" not in (k1, k2):
                            continue
                        if f1 + s1 <= f2 or f2 + s2 <= f1:
                            continue
                        n1 = cfg.threads[i].frames[-1].node
                        n2 = cfg.threads[j].frames[-1].node
                        s_1, s_2 = self.p.stmts[n1], self.p.stmts[n2]
                        key = (frozenset({_origin(s_1), _origin(s_2)}), cfg.meta[o1].key)
                        if key not in self.verdict.races:
                            self.verdict.races.add(key)
                            self.verdict.race_lines[key] = tuple(sorted((s_1.line, s_2.line)))

    def _snapshot(self, cfg: Config):
        for t in cfg.threads:
            if t.done:
                continue
            f = t.frames[-1]
            cells = []
            for obj, vals in cfg.mem.items():
                if obj[0] == "g" or (obj[0] == "tls" and obj[2] == t.tid) or (obj[0] == "f" and obj[1] == f.fid):
                    meta = cfg.meta[obj]
                    for off, v in vals.items():
                        cells.append((meta.key, off, _snap_value(cfg, v)))
            self.verdict.state_sets.setdefault((t.entry, _origin(self.p.stmts[f.node])), set()).add(frozenset(cells))


def _zeroed(ty) -> Dict[int, object]:
    """Static storage: every scalar element starts as zero (or NULL)."""
    elem = element_type(ty)
    size = elem.size() or 1
    total = ty.size() or size
    zero = NULLP if elem.is_pointer else 0
    if not (elem.is_pointer or isinstance(elem, IntType)):
        return {}
    return {off: zero for off in range(0, total, size)}


def _snap_value(cfg: Config, v):
    if isinstance(v, tuple) and v[0] == "p" and v[1] is not None:
        meta = cfg.meta.get(v[1])
        return ("p", meta.key if meta else None, v[2])
    return v


def _origin(s: Stmt) -> int:
    return s.origin if s.origin is not None and s.origin >= 0 else s.sid


def enumerate(p: IRProgram, bounds: Optional[Bounds] = None, single_threaded: bool = False,
              reduce: bool = True, snapshots: bool = False) -> OracleVerdict:
    """Explore ``p`` exhaustively within ``bounds``."""
    return Explorer(p, bounds or Bounds(), single_threaded, reduce, snapshots).run()


def race_key(report) -> RaceKey:
    """Oracle key of a static race report."""
    return (frozenset({report.first.origin, report.second.origin}), report.base.key())
