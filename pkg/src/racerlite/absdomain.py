"""Value domain in the style of Frama-C's CValue.

An address is a pair of a :class:`Base` (a variable, an allocation site, a
function, or the null base) and a byte offset interval.  Abstract values are
strided integer intervals, sets of addresses, ``TOP`` and ``BOTTOM``; an
abstract state maps bases to values.

Integers saturate at the bounds of their C type instead of wrapping around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from .frontend.ctypes import (
    ArrayType,
    CType,
    FunctionType,
    IntType,
    PointerType,
    element_type,
    pointee_size,
)
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
    Nondet,
    NondetAssign,
    Return,
    Skip,
    Stmt,
    Unary,
    Var,
)

INF = math.inf
Bound = Union[int, float]

POINTER_CAP = 16
LADDER = (0, 1, 16, 256)


# --------------------------------------------------------------------------
# bases and addresses

_KIND_RANK = {"global": 0, "dynamic": 1, "local": 2, "formal": 3, "func": 4, "null": 5, "unknown": 6, "ret": 7}


@dataclass(frozen=True)
class Base:
    """Identity of a memory object.

    ``kind`` is ``global``, ``local``, ``formal``, ``dynamic``, ``func``,
    ``null``, ``unknown`` (target of an unresolved pointer) or ``ret`` (the
    return slot of a function).  Dynamic bases are identified by their
    allocation site; ``origin`` is the site's sid before loop peeling.
    """

    kind: str
    name: str
    fn: Optional[str] = None
    site: Optional[int] = None
    ty: Optional[CType] = field(default=None, compare=False)
    weak: bool = field(default=False, compare=False)
    size: Optional[int] = field(default=None, compare=False)
    origin: Optional[int] = field(default=None, compare=False)
    atomic: bool = field(default=False, compare=False)
    thread_local: bool = field(default=False, compare=False)

    @property
    def byte_size(self) -> Optional[int]:
        if self.size is not None:
            return self.size
        return self.ty.size() if self.ty is not None else None

    @property
    def is_array(self) -> bool:
        return isinstance(self.ty, ArrayType) or (self.kind == "dynamic" and self.size is not None and self.elem_size is not None and self.size > self.elem_size)

    @property
    def elem_size(self) -> Optional[int]:
        if self.ty is None:
            return None
        return element_type(self.ty).size()

    @property
    def is_memory(self) -> bool:
        return self.kind in ("global", "local", "formal", "dynamic")

    def sort_key(self):
        return (_KIND_RANK.get(self.kind, 9), self.fn or "", self.name, self.site if self.site is not None else -1)

    def key(self) -> Tuple:
        """Identity that survives loop peeling (used to compare with oracles)."""
        if self.kind == "dynamic":
            return ("dynamic", self.origin if self.origin is not None else self.site)
        return (self.kind, self.fn, self.name)

    def __str__(self):
        if self.kind in ("local", "formal"):
            return f"{self.fn}::{self.name}"
        return self.name

    def __repr__(self):
        return f"Base({self})"


NULL_BASE = Base("null", "NULL")
UNKNOWN_BASE = Base("unknown", "?")


def var_base(v: Var) -> Base:
    if v.scope == "func":
        return Base("func", v.name, ty=v.ty)
    if v.scope == "global":
        return Base("global", v.name, ty=v.ty)
    return Base(v.scope, v.name, v.fn, ty=v.ty)


def decl_base(d) -> Base:
    """Base of a frontend VarDecl, carrying its qualifiers."""
    return Base(d.scope, d.name, d.fn, ty=d.ty, atomic=d.atomic, thread_local=d.thread_local)


def ret_base(fn: str) -> Base:
    return Base("ret", f"ret:{fn}", fn)


def dynamic_base(site: int, origin: int, name: str, ty: Optional[CType], size: Optional[int], weak: bool) -> Base:
    return Base("dynamic", name, None, site, ty, weak, size, origin)


# --------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class IntIv:
    """``{lo, lo+stride, ..., hi}``; bounds may be infinite."""

    lo: Bound
    hi: Bound
    stride: int = 1

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        stride = self.stride
        if self.lo == self.hi or stride < 1:
            stride = 1
        if stride > 1 and (math.isinf(self.lo) or math.isinf(self.hi)):
            if math.isinf(self.lo):
                stride = 1
        if stride > 1 and not math.isinf(self.hi):
            hi = self.lo + ((self.hi - self.lo) // stride) * stride
            object.__setattr__(self, "hi", hi)
            if hi == self.lo:
                stride = 1
        object.__setattr__(self, "stride", stride)

    # basic queries
    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    @property
    def modulus(self) -> int:
        return 0 if self.is_singleton else self.stride

    @property
    def finite(self) -> bool:
        return not (math.isinf(self.lo) or math.isinf(self.hi))

    def __contains__(self, v: int) -> bool:
        if not (self.lo <= v <= self.hi):
            return False
        return self.stride == 1 or math.isinf(self.lo) or (v - self.lo) % self.stride == 0

    def values(self, limit: int = 64):
        if not self.finite or (self.hi - self.lo) // self.stride >= limit:
            return None
        return list(range(int(self.lo), int(self.hi) + 1, self.stride))

    def __str__(self):
        lo = "-oo" if self.lo == -INF else str(self.lo)
        hi = "+oo" if self.hi == INF else str(self.hi)
        if self.is_singleton:
            return f"{{{lo}}}"
        s = f"[{lo},{hi}]"
        return s if self.stride == 1 else f"{s}%{self.stride}"


OffsetIv = IntIv
ZERO = IntIv(0, 0)
TOP_INT = IntIv(-INF, INF)
BOOL = IntIv(0, 1)
TRUE = IntIv(1, 1)
FALSE = IntIv(0, 0)


def iv(lo: Bound, hi: Optional[Bound] = None, stride: int = 1) -> IntIv:
    return IntIv(lo, lo if hi is None else hi, stride)


def _gcd(*xs) -> int:
    g = 0
    for x in xs:
        if isinstance(x, float):
            return 1
        g = math.gcd(g, int(x))
    return g


def iv_join(a: IntIv, b: IntIv) -> IntIv:
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    if math.isinf(a.lo) or math.isinf(b.lo):
        return IntIv(lo, hi)
    g = _gcd(a.modulus, b.modulus, abs(a.lo - b.lo))
    return IntIv(lo, hi, g or 1)


def iv_leq(a: IntIv, b: IntIv) -> bool:
    if a.lo < b.lo or a.hi > b.hi:
        return False
    if b.stride == 1 or math.isinf(b.lo):
        return True
    if math.isinf(a.lo):
        return False
    return (a.lo - b.lo) % b.stride == 0 and a.modulus % b.stride == 0


def _crt(r1: int, m1: int, r2: int, m2: int) -> Optional[Tuple[int, int]]:
    """x = r1 (mod m1) and x = r2 (mod m2) as x = r (mod lcm), if solvable."""
    g = math.gcd(m1, m2)
    if (r2 - r1) % g:
        return None
    lcm = m1 // g * m2
    if m1 == 1:
        return r2 % lcm, lcm
    k = (r2 - r1) // g * pow(m1 // g, -1, m2 // g) % (m2 // g) if m2 // g > 1 else 0
    return (r1 + m1 * k) % lcm, lcm


def iv_meet(a: IntIv, b: IntIv) -> Optional[IntIv]:
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo > hi:
        return None
    # common progression of both operands (unbounded below means stride 1)
    r, stride = 0, 1
    for x in (a, b):
        if x.stride > 1 and not math.isinf(x.lo):
            c = _crt(r, stride, int(x.lo) % x.stride, x.stride)
            if c is None:
                return None
            r, stride = c
    if stride > 1 and not math.isinf(lo):
        lo = lo + (r - lo) % stride
    if lo > hi:
        return None
    res = IntIv(lo, hi, stride)
    if res.lo not in a or res.lo not in b:
        return None
    return res


def iv_clamp(a: IntIv, ty: Optional[CType]) -> IntIv:
    if not isinstance(ty, IntType):
        return a
    lo_t, hi_t = ty.min_value, ty.max_value
    lo = min(max(a.lo, lo_t), hi_t)
    hi = max(min(a.hi, hi_t), lo_t)
    if lo == a.lo and hi == a.hi:
        return a
    stride = a.stride if lo == a.lo else 1
    return IntIv(lo, hi, stride)


def type_top(ty: Optional[CType]) -> IntIv:
    if isinstance(ty, IntType):
        return IntIv(ty.min_value, ty.max_value)
    return TOP_INT


def _add(x: Bound, y: Bound) -> Bound:
    if math.isinf(x) and math.isinf(y) and x != y:
        raise ArithmeticError("inf - inf")
    return x + y


def iv_add(a: IntIv, b: IntIv) -> IntIv:
    g = _gcd(a.modulus, b.modulus)
    return IntIv(_add(a.lo, b.lo), _add(a.hi, b.hi), g or 1)


def iv_neg(a: IntIv) -> IntIv:
    return IntIv(-a.hi, -a.lo, a.stride)


def iv_sub(a: IntIv, b: IntIv) -> IntIv:
    return iv_add(a, iv_neg(b))


def _mul(x: Bound, y: Bound) -> Bound:
    if x == 0 or y == 0:
        return 0
    return x * y


def iv_mul(a: IntIv, b: IntIv) -> IntIv:
    if b.is_singleton and not math.isinf(b.lo):
        a, b = b, a
    if a.is_singleton and not math.isinf(a.lo):
        c = int(a.lo)
        if c == 0:
            return ZERO
        lo, hi = sorted((_mul(b.lo, c), _mul(b.hi, c)))
        stride = b.stride * abs(c) if not math.isinf(b.lo) else 1
        return IntIv(lo, hi, stride if not b.is_singleton else 1)
    prods = [_mul(x, y) for x in (a.lo, a.hi) for y in (b.lo, b.hi)]
    return IntIv(min(prods), max(prods))


def iv_div(a: IntIv, b: IntIv) -> IntIv:
    if b.is_singleton and not math.isinf(b.lo) and b.lo != 0:
        c = int(b.lo)

        def q(x):
            if math.isinf(x):
                return x if c > 0 else -x
            return int(x / c)  # C truncation

        lo, hi = sorted((q(a.lo), q(a.hi)))
        return IntIv(lo, hi)
    if b.lo > 0 or b.hi < 0:
        m = max(abs(a.lo), abs(a.hi))
        return IntIv(-m, m)
    return TOP_INT


def iv_mod(a: IntIv, b: IntIv) -> IntIv:
    if b.is_singleton and not math.isinf(b.lo) and b.lo != 0:
        m = abs(int(b.lo)) - 1
        if a.lo >= 0:
            if a.hi <= m:
                return a
            return IntIv(0, m)
        return IntIv(-m, m)
    return TOP_INT


def iv_compare(op: str, a: IntIv, b: IntIv) -> IntIv:
    if op == "==":
        if a.is_singleton and b.is_singleton and a.lo == b.lo:
            return TRUE
        return FALSE if iv_meet(a, b) is None else BOOL
    if op == "!=":
        return _flip(iv_compare("==", a, b))
    if op == "<":
        if a.hi < b.lo:
            return TRUE
        return FALSE if a.lo >= b.hi else BOOL
    if op == "<=":
        if a.hi <= b.lo:
            return TRUE
        return FALSE if a.lo > b.hi else BOOL
    if op == ">":
        return iv_compare("<", b, a)
    if op == ">=":
        return iv_compare("<=", b, a)
    raise ValueError(op)


def _flip(b: IntIv) -> IntIv:
    if b == TRUE:
        return FALSE
    if b == FALSE:
        return TRUE
    return BOOL


def truthiness(v: "Value") -> Tuple[bool, bool]:
    """(may be true, may be false)."""
    if v is BOTTOM:
        return False, False
    if isinstance(v, IntIv):
        return not (v.lo == 0 and v.hi == 0), 0 in v
    if isinstance(v, Pointers):
        return bool(v.addrs), v.null
    return True, True


# --------------------------------------------------------------------------
# values


class _Singleton:
    _name = ""

    def __repr__(self):
        return self._name

    def __str__(self):
        return self._name

    def __reduce__(self):
        return self._name


class TopValue(_Singleton):
    _name = "TOP"


class BottomValue(_Singleton):
    _name = "BOTTOM"


TOP = TopValue()
BOTTOM = BottomValue()


@dataclass(frozen=True)
class Address:
    base: Base
    offset: IntIv = ZERO

    def __str__(self):
        if self.offset == ZERO:
            return f"&{self.base}"
        return f"&{self.base}+{self.offset}"


@dataclass(frozen=True)
class Pointers:
    """A set of addresses (at most one per base) plus possibly NULL."""

    addrs: FrozenSet[Address]
    null: bool = False

    def __post_init__(self):
        if not self.addrs and not self.null:
            raise ValueError("empty pointer value")

    @property
    def bases(self) -> FrozenSet[Base]:
        return frozenset(a.base for a in self.addrs)

    def __str__(self):
        items = sorted(str(a) for a in self.addrs)
        if self.null:
            items.append("NULL")
        return "{" + ", ".join(items) + "}"


Value = Union[IntIv, Pointers, TopValue, BottomValue]
NULL = Pointers(frozenset(), True)


def pointers(addrs: Iterable[Address], null: bool = False) -> Value:
    """Normalise: merge addresses of the same base and apply the size cap."""
    by_base: Dict[Base, IntIv] = {}
    for a in addrs:
        by_base[a.base] = iv_join(by_base[a.base], a.offset) if a.base in by_base else a.offset
    if not by_base and not null:
        return BOTTOM
    if len(by_base) > POINTER_CAP:
        by_base = {b: _full_range(b) for b in by_base}
    return Pointers(frozenset(Address(b, o) for b, o in by_base.items()), null)


def _full_range(b: Base) -> IntIv:
    size = b.byte_size
    return IntIv(0, size - 1) if size else TOP_INT


def join(a: Value, b: Value) -> Value:
    if a is BOTTOM:
        return b
    if b is BOTTOM:
        return a
    if a is TOP or b is TOP:
        return TOP
    if isinstance(a, IntIv) and isinstance(b, IntIv):
        return iv_join(a, b)
    if isinstance(a, Pointers) and isinstance(b, Pointers):
        if a == b:
            return a
        return pointers(list(a.addrs) + list(b.addrs), a.null or b.null)
    ptr, other = (a, b) if isinstance(a, Pointers) else (b, a)
    if isinstance(other, IntIv) and other == ZERO:
        return Pointers(ptr.addrs, True)
    return TOP


def leq(a: Value, b: Value) -> bool:
    if a is BOTTOM or b is TOP:
        return True
    if a is TOP or b is BOTTOM:
        return False
    if isinstance(a, IntIv) and isinstance(b, IntIv):
        return iv_leq(a, b)
    if isinstance(a, Pointers) and isinstance(b, Pointers):
        if a.null and not b.null:
            return False
        boff = {x.base: x.offset for x in b.addrs}
        return all(x.base in boff and iv_leq(x.offset, boff[x.base]) for x in a.addrs)
    if isinstance(a, IntIv) and isinstance(b, Pointers):
        return a == ZERO and b.null
    if isinstance(a, Pointers) and isinstance(b, IntIv):
        return not a.addrs and 0 in b
    return False


def _ladder(ty: Optional[CType], size: Optional[int] = None):
    hi = [t for t in LADDER]
    lo = [-t for t in LADDER]
    if isinstance(ty, IntType):
        hi = [t for t in hi if t <= ty.max_value] + [ty.max_value]
        lo = [t for t in lo if t >= ty.min_value] + [ty.min_value]
    elif size:
        hi = [t for t in hi if t < size] + [size - 1]
    return sorted(set(lo)), sorted(set(hi))


def iv_widen(prev: IntIv, nxt: IntIv, ty: Optional[CType] = None, size: Optional[int] = None) -> IntIv:
    j = iv_join(prev, nxt)
    los, his = _ladder(ty, size)
    lo, hi = j.lo, j.hi
    if j.lo < prev.lo:
        cands = [t for t in los if t <= j.lo]
        lo = max(cands) if cands else -INF
    if j.hi > prev.hi:
        cands = [t for t in his if t >= j.hi]
        hi = min(cands) if cands else INF
    stride = j.stride if lo == j.lo else 1
    return IntIv(lo, hi, stride)


def widen(prev: Value, nxt: Value, ty: Optional[CType] = None) -> Value:
    """Widening with the threshold ladder 0, 1, 16, 256, type max, then +oo."""
    if prev is BOTTOM:
        return nxt
    if isinstance(prev, IntIv) and isinstance(nxt, IntIv):
        return iv_widen(prev, nxt, ty)
    if isinstance(prev, Pointers) and isinstance(nxt, Pointers):
        j = join(prev, nxt)
        if not isinstance(j, Pointers):
            return j
        poff = {a.base: a.offset for a in prev.addrs}
        out = []
        for a in j.addrs:
            if a.base in poff:
                out.append(Address(a.base, iv_widen(poff[a.base], a.offset, None, a.base.byte_size)))
            else:
                out.append(a)
        return pointers(out, j.null)
    return join(prev, nxt)


# --------------------------------------------------------------------------
# states


def default_value(b: Base) -> Value:
    """Reading an unmapped base: allocation sites that were never executed
    hold nothing, everything else is unknown."""
    return BOTTOM if b.kind == "dynamic" else TOP


class AbstractState:
    """Immutable mapping from bases to values."""

    __slots__ = ("values", "reachable", "_hash")

    def __init__(self, values: Optional[Mapping[Base, Value]] = None, reachable: bool = True):
        self.values: Dict[Base, Value] = dict(values or {}) if reachable else {}
        self.reachable = reachable
        self._hash = None

    @staticmethod
    def unreachable() -> "AbstractState":
        return _UNREACHABLE

    @staticmethod
    def top() -> "AbstractState":
        return _TOP_STATE

    def get(self, b: Base) -> Value:
        if not self.reachable:
            return BOTTOM
        v = self.values.get(b)
        return default_value(b) if v is None else v

    def set(self, b: Base, v: Value) -> "AbstractState":
        if not self.reachable:
            return self
        vals = dict(self.values)
        vals[b] = v
        return AbstractState(vals)

    def drop(self, pred) -> "AbstractState":
        if not self.reachable:
            return self
        return AbstractState({b: v for b, v in self.values.items() if not pred(b)})

    def bases(self):
        return self.values.keys()

    def __eq__(self, other):
        if not isinstance(other, AbstractState):
            return NotImplemented
        return self.reachable == other.reachable and self.values == other.values

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.reachable, frozenset(self.values.items())))
        return self._hash

    def __repr__(self):
        return f"AbstractState({pretty_state(self)!r})"


_UNREACHABLE = AbstractState(reachable=False)
_TOP_STATE = AbstractState()


def state_of(mapping: Mapping[Base, Value]) -> AbstractState:
    return AbstractState(mapping)


def join_state(a: AbstractState, b: AbstractState) -> AbstractState:
    """Pointwise least upper bound; unreachable is the identity."""
    if not a.reachable:
        return b
    if not b.reachable:
        return a
    if a is b:
        return a
    out: Dict[Base, Value] = {}
    for k in a.values.keys() | b.values.keys():
        v = join(a.get(k), b.get(k))
        if v is not TOP or k.kind == "dynamic":
            out[k] = v
    return AbstractState(out)


def leq_state(a: AbstractState, b: AbstractState) -> bool:
    if not a.reachable:
        return True
    if not b.reachable:
        return False
    keys = a.values.keys() | b.values.keys()
    return all(leq(a.get(k), b.get(k)) for k in keys)


def widen_state(prev: AbstractState, nxt: AbstractState) -> AbstractState:
    if not prev.reachable:
        return nxt
    if not nxt.reachable:
        return prev
    out: Dict[Base, Value] = {}
    for k in prev.values.keys() | nxt.values.keys():
        ty = element_type(k.ty) if k.ty is not None else None
        v = widen(prev.get(k), nxt.get(k), ty)
        if v is not TOP or k.kind == "dynamic":
            out[k] = v
    return AbstractState(out)


def pretty_value(v: Value) -> str:
    return str(v)


def pretty_state(s: AbstractState) -> str:
    """Stable text form: one ``base -> value`` entry per line, sorted."""
    if not s.reachable:
        return "<unreachable>"
    items = sorted(s.values.items(), key=lambda kv: kv[0].sort_key())
    return "\n".join(f"{b} -> {v}" for b, v in items)


# --------------------------------------------------------------------------
# expression evaluation


def _int_part(v: Value) -> Optional[IntIv]:
    if isinstance(v, IntIv):
        return v
    if isinstance(v, Pointers) and not v.addrs:
        return ZERO
    return None


def eval_expr(s: AbstractState, e: Expr) -> Value:
    """Sound abstraction of the value of ``e`` in ``s``."""
    if not s.reachable:
        return BOTTOM
    if isinstance(e, Const):
        if e.ty.is_pointer and e.value == 0:
            return NULL
        return IntIv(e.value, e.value)
    if isinstance(e, Nondet):
        return TOP_INT
    if isinstance(e, Var):
        if e.scope == "func":
            return Pointers(frozenset({Address(var_base(e))}))
        if isinstance(e.ty, ArrayType):
            return Pointers(frozenset({Address(var_base(e))}))
        return s.get(var_base(e))
    if isinstance(e, (Deref, Index)):
        if isinstance(e.ty, ArrayType):
            return pointers(eval_lvalue(s, e))
        addrs = eval_lvalue(s, e)
        v: Value = BOTTOM
        for a in addrs:
            v = join(v, TOP if a.base.kind == "unknown" else s.get(a.base))
        if v is BOTTOM:
            return TOP if addrs else BOTTOM
        return v
    if isinstance(e, AddrOf):
        if isinstance(e.operand, Var) and e.operand.scope == "func":
            return eval_expr(s, e.operand)
        addrs = eval_lvalue(s, e.operand)
        return pointers(addrs) if addrs else TOP
    if isinstance(e, Cast):
        return convert(eval_expr(s, e.operand), e.ty)
    if isinstance(e, Unary):
        v = eval_expr(s, e.operand)
        if e.op == "!":
            t, f = truthiness(v)
            return TRUE if not t and f else FALSE if t and not f else BOOL if (t or f) else BOTTOM
        x = _int_part(v)
        if x is None:
            return TOP_INT if v is not BOTTOM else BOTTOM
        if e.op == "-":
            return iv_clamp(iv_neg(x), e.ty)
        if e.op == "~":
            if x.is_singleton and not math.isinf(x.lo):
                return IntIv(~int(x.lo), ~int(x.lo))
            return type_top(e.ty)
        raise ValueError(e.op)
    if isinstance(e, Binary):
        return _eval_binary(s, e)
    if isinstance(e, Cond):
        t, f = truthiness(eval_expr(s, e.test))
        v: Value = BOTTOM
        if t:
            v = join(v, eval_expr(filter_cond(s, e.test, True), e.then))
        if f:
            v = join(v, eval_expr(filter_cond(s, e.test, False), e.other))
        return v
    raise TypeError(f"cannot evaluate {type(e).__name__}")


def convert(v: Value, ty: CType) -> Value:
    """Value conversion on assignment or cast."""
    if v is BOTTOM or v is TOP:
        return v
    if ty.is_pointer:
        if isinstance(v, IntIv):
            if v == ZERO:
                return NULL
            return TOP
        return v
    if isinstance(ty, IntType):
        if isinstance(v, Pointers):
            return ZERO if not v.addrs else TOP
        return iv_clamp(v, ty)
    return v


def _eval_binary(s: AbstractState, e: Binary) -> Value:
    op = e.op
    l = eval_expr(s, e.left)
    r = eval_expr(s, e.right)
    if l is BOTTOM or r is BOTTOM:
        return BOTTOM
    if op in ("&&", "||"):
        lt, lf = truthiness(l)
        if op == "&&":
            if not lt:
                return FALSE
            rt, rf = truthiness(eval_expr(filter_cond(s, e.left, True), e.right))
            may_t, may_f = lt and rt, lf or rf
        else:
            if not lf:
                return TRUE
            rt, rf = truthiness(eval_expr(filter_cond(s, e.left, False), e.right))
            may_t, may_f = lt or rt, lf and rf
        return TRUE if may_t and not may_f else FALSE if may_f and not may_t else BOOL
    if op in ("==", "!=", "<", "<=", ">", ">="):
        li, ri = _int_part(l), _int_part(r)
        if li is not None and ri is not None:
            return iv_compare(op, li, ri)
        if op in ("==", "!=") and (isinstance(l, Pointers) or isinstance(r, Pointers)):
            res = _pointer_eq(l, r)
            return res if op == "==" else _flip(res)
        return BOOL
    # pointer arithmetic
    if e.ty.is_pointer and isinstance(l, Pointers):
        ri = _int_part(r)
        if ri is None:
            return TOP
        scale = pointee_size(e.ty)
        delta = iv_mul(ri, IntIv(scale, scale))
        if op == "-":
            delta = iv_neg(delta)
        return pointers((Address(a.base, iv_add(a.offset, delta)) for a in l.addrs), l.null and ri == ZERO)
    li, ri = _int_part(l), _int_part(r)
    if li is None or ri is None:
        return TOP_INT if e.ty.is_integer else TOP
    try:
        if op == "+":
            res = iv_add(li, ri)
        elif op == "-":
            res = iv_sub(li, ri)
        elif op == "*":
            res = iv_mul(li, ri)
        elif op == "/":
            res = iv_div(li, ri)
        elif op == "%":
            res = iv_mod(li, ri)
        elif op == "&" and ri.is_singleton and ri.lo >= 0 and li.lo >= 0:
            res = IntIv(0, min(ri.lo, li.hi)) if not (li.is_singleton) else IntIv(int(li.lo) & int(ri.lo), int(li.lo) & int(ri.lo))
        elif op in ("&", "|", "^", "<<", ">>") and li.is_singleton and ri.is_singleton and li.finite and ri.finite and ri.lo >= 0:
            a, b = int(li.lo), int(ri.lo)
            c = {"&": a & b, "|": a | b, "^": a ^ b, "<<": a << min(b, 64), ">>": a >> b}[op]
            res = IntIv(c, c)
        else:
            res = type_top(e.ty)
    except ArithmeticError:
        res = type_top(e.ty)
    return iv_clamp(res, e.ty)


def _pointer_eq(l: Value, r: Value) -> IntIv:
    def as_ptr(v):
        if isinstance(v, Pointers):
            return v
        if isinstance(v, IntIv) and v == ZERO:
            return NULL
        return None

    a, b = as_ptr(l), as_ptr(r)
    if a is None or b is None:
        return BOOL
    if not a.addrs and not b.addrs:
        return TRUE
    if not a.addrs and a.null:
        return FALSE if not b.null else BOOL
    if not b.addrs and b.null:
        return FALSE if not a.null else BOOL
    if not (a.bases & b.bases) and not (a.null and b.null):
        return FALSE
    return BOOL


def eval_lvalue(s: AbstractState, lv: Expr) -> FrozenSet[Address]:
    """Addresses ``lv`` may denote.  The empty set means the access is surely
    invalid (e.g. a null dereference); an unresolvable pointer yields the
    distinguished unknown base."""
    if not s.reachable:
        return frozenset()
    if isinstance(lv, Var):
        return frozenset({Address(var_base(lv))})
    if isinstance(lv, Deref):
        return targets_of(eval_expr(s, lv.operand))
    if isinstance(lv, Index):
        if isinstance(lv.base.ty, ArrayType):
            bases = eval_lvalue(s, lv.base)
        else:
            bases = targets_of(eval_expr(s, lv.base))
        idx = _int_part(eval_expr(s, lv.index))
        if idx is None:
            idx = TOP_INT
        scale = lv.ty.size() or 1
        delta = iv_mul(idx, IntIv(scale, scale))
        out = set()
        for a in bases:
            if a.base.kind == "unknown":
                out.add(a)
            else:
                out.add(Address(a.base, iv_add(a.offset, delta)))
        return frozenset(out)
    if isinstance(lv, Cast):
        return eval_lvalue(s, lv.operand)
    return frozenset()


def targets_of(v: Value) -> FrozenSet[Address]:
    if isinstance(v, Pointers):
        return frozenset(a for a in v.addrs if a.base.kind != "func")
    if v is BOTTOM:
        return frozenset()
    if isinstance(v, IntIv) and v == ZERO:
        return frozenset()
    return frozenset({Address(UNKNOWN_BASE, TOP_INT)})


# --------------------------------------------------------------------------
# guards


_MIRROR = {"==": "==", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}
_NEGATE = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def _strong_var(e: Expr) -> Optional[Base]:
    while isinstance(e, Cast) and (e.ty.is_integer or e.ty.is_pointer):
        e = e.operand
    if isinstance(e, Var) and e.scope in ("global", "local", "formal") and not isinstance(e.ty, ArrayType):
        return var_base(e)
    return None


def _refine_int(v: IntIv, op: str, c: IntIv) -> Optional[IntIv]:
    if op == "==":
        return iv_meet(v, c)
    if op == "!=":
        if c.is_singleton and not math.isinf(c.lo):
            k = c.lo
            if v.is_singleton:
                return None if v.lo == k else v
            if k == v.lo:
                return IntIv(v.lo + v.stride, v.hi, v.stride)
            if k == v.hi:
                return IntIv(v.lo, v.hi - v.stride, v.stride)
        return v
    if op == "<":
        return iv_meet(v, IntIv(-INF, c.hi - 1)) if not math.isinf(c.hi) else v
    if op == "<=":
        return iv_meet(v, IntIv(-INF, c.hi))
    if op == ">":
        return iv_meet(v, IntIv(c.lo + 1, INF)) if not math.isinf(c.lo) else v
    if op == ">=":
        return iv_meet(v, IntIv(c.lo, INF))
    return v


def _refine(s: AbstractState, b: Base, op: str, other: Value) -> AbstractState:
    cur = s.get(b)
    if cur is TOP:
        oi = _int_part(other)
        if oi is None or not isinstance(b.ty, IntType):
            if isinstance(other, Pointers) and op == "==" and isinstance(b.ty, PointerType):
                return s.set(b, other)
            return s
        cur = type_top(b.ty)
    if isinstance(cur, IntIv):
        oi = _int_part(other)
        if oi is None:
            return s
        new = _refine_int(cur, op, oi)
        if new is None:
            return AbstractState.unreachable()
        return s.set(b, new)
    if isinstance(cur, Pointers):
        oi = _int_part(other)
        is_null_cmp = oi is not None and oi == ZERO
        if is_null_cmp and op == "==":
            return s.set(b, NULL) if cur.null else AbstractState.unreachable()
        if is_null_cmp and op == "!=":
            if not cur.addrs:
                return AbstractState.unreachable()
            return s.set(b, Pointers(cur.addrs, False))
    return s


def filter_cond(s: AbstractState, cond: Expr, truth: bool) -> AbstractState:
    """Restrict ``s`` to the states in which ``cond`` evaluates to ``truth``."""
    if not s.reachable:
        return s
    t, f = truthiness(eval_expr(s, cond))
    if (truth and not t) or (not truth and not f):
        return AbstractState.unreachable()
    if isinstance(cond, Unary) and cond.op == "!":
        return filter_cond(s, cond.operand, not truth)
    if isinstance(cond, Cast):
        return filter_cond(s, cond.operand, truth)
    if isinstance(cond, Binary) and cond.op in ("&&", "||"):
        conj = (cond.op == "&&") == truth
        if conj:
            return filter_cond(filter_cond(s, cond.left, truth), cond.right, truth)
        return join_state(filter_cond(s, cond.left, truth), filter_cond(s, cond.right, truth))
    if isinstance(cond, Binary) and cond.op in _MIRROR:
        op = cond.op if truth else _NEGATE[cond.op]
        lb, rb = _strong_var(cond.left), _strong_var(cond.right)
        out = s
        if lb is not None:
            out = _refine(out, lb, op, eval_expr(out, cond.right))
        if rb is not None and out.reachable:
            out = _refine(out, rb, _MIRROR[op], eval_expr(out, cond.left))
        return out
    b = _strong_var(cond)
    if b is not None:
        return _refine(s, b, "!=" if truth else "==", ZERO)
    return s


# --------------------------------------------------------------------------
# transfer


def write(s: AbstractState, targets: FrozenSet[Address], v: Value, strong_ok: bool = True) -> AbstractState:
    """Store ``v`` at ``targets``: a strong update for a single exact
    location of a strong base, a weak update (join) otherwise."""
    if not s.reachable:
        return s
    real = [a for a in targets if a.base.is_memory]
    if not real:
        return s
    if (
        strong_ok
        and len(real) == 1
        and len(targets) == 1
        and not real[0].base.weak
        and not real[0].base.is_array
        and real[0].offset.is_singleton
    ):
        return s.set(real[0].base, v)
    out = s
    for a in real:
        out = out.set(a.base, join(out.get(a.base), v))
    return out


def assign(s: AbstractState, lhs: Expr, v: Value, keep_old: bool = False) -> AbstractState:
    return write(s, eval_lvalue(s, lhs), convert(v, lhs.ty), strong_ok=not keep_old)


@dataclass(frozen=True)
class TransferContext:
    """What ``transfer_stmt`` needs beyond the state: the weakness of
    allocation sites and the values produced by calls it does not follow."""

    weak_sites: FrozenSet[int] = frozenset()
    call_result: Optional[Value] = None


def alloc_base(stmt: Alloc, weak: bool, s: Optional[AbstractState] = None) -> Base:
    ty = stmt.lhs.ty.target if isinstance(stmt.lhs.ty, PointerType) else None
    size = None
    if s is not None:
        sz = _int_part(eval_expr(s, stmt.size))
        if sz is not None and sz.is_singleton and sz.finite:
            size = int(sz.lo)
    elif isinstance(stmt.size, Const):
        size = stmt.size.value
    if ty is not None and (ty.size() is None or ty.size() == 0):
        ty = None
    name = f"malloc@{stmt.fn}:{stmt.line}"
    return dynamic_base(stmt.sid, stmt.origin, name, ty, size, weak)


def transfer_stmt(s: AbstractState, stmt: Stmt, ctx: Optional[TransferContext] = None) -> AbstractState:
    """Abstract effect of a non-branching statement.

    Calls are treated as opaque here: their left-hand side receives
    ``ctx.call_result`` (unknown by default) and a guarded call joins with the
    unchanged state.  The interpreter backend handles calls into program
    functions itself.
    """
    ctx = ctx or TransferContext()
    if not s.reachable:
        return s
    if isinstance(stmt, Assign):
        return assign(s, stmt.lhs, eval_expr(s, stmt.rhs))
    if isinstance(stmt, NondetAssign):
        return assign(s, stmt.lhs, eval_expr(s, stmt.rhs), keep_old=True)
    if isinstance(stmt, Alloc):
        b = alloc_base(stmt, stmt.sid in ctx.weak_sites, s)
        old = s.get(b)
        fresh = TOP if old is BOTTOM or not b.weak else join(old, TOP)
        s2 = s.set(b, fresh if not stmt.keep_old else join(old, fresh))
        return assign(s2, stmt.lhs, Pointers(frozenset({Address(b)})), keep_old=stmt.keep_old)
    if isinstance(stmt, Call):
        out = s
        if stmt.lhs is not None:
            res = ctx.call_result if ctx.call_result is not None else type_top(stmt.lhs.ty)
            out = assign(s, stmt.lhs, res)
        if isinstance(stmt, GuardedCall):
            return join_state(s, out)
        return out
    if isinstance(stmt, If):
        return join_state(filter_cond(s, stmt.cond, True), filter_cond(s, stmt.cond, False))
    if isinstance(stmt, (Skip, Free, Return)):
        return s
    raise TypeError(f"no transfer for {type(stmt).__name__}")


# --------------------------------------------------------------------------
# offsets


def _diff_contains(a: IntIv, b: IntIv, lo: int, hi: int) -> bool:
    """Is there x in a, y in b with lo <= x - y <= hi?"""
    if not (a.finite and b.finite):
        d_lo = _add(a.lo, -b.hi) if not (math.isinf(a.lo) and math.isinf(b.hi)) else -INF
        d_hi = _add(a.hi, -b.lo) if not (math.isinf(a.hi) and math.isinf(b.lo)) else INF
        return d_lo <= hi and d_hi >= lo
    d_lo, d_hi = a.lo - b.hi, a.hi - b.lo
    lo, hi = max(lo, d_lo), min(hi, d_hi)
    if lo > hi:
        return False
    g = _gcd(a.modulus, b.modulus)
    if g <= 1:
        return True
    r = (a.lo - b.lo) % g
    first = lo + (r - lo) % g
    return first <= hi


def offsets_may_overlap(a: Address, b: Address, sizes: Tuple[Optional[int], Optional[int]]) -> bool:
    """Can the byte ranges ``[offset, offset + size)`` intersect?"""
    sa, sb = sizes
    if sa is None or sb is None:
        return True
    # x < y + sb and y < x + sa  <=>  -sa < x - y < sb
    return _diff_contains(a.offset, b.offset, -sa + 1, sb - 1)


def offsets_must_overlap(a: Address, b: Address, sizes: Tuple[Optional[int], Optional[int]]) -> bool:
    """Do the byte ranges intersect for every concretisation?"""
    sa, sb = sizes
    if sa is None or sb is None:
        return False
    oa, ob = a.offset, b.offset
    if not (oa.finite and ob.finite):
        return False
    return oa.lo - ob.hi > -sa and oa.hi - ob.lo < sb
