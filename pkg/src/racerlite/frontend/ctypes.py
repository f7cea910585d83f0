"""C types understood by the mini-C frontend."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

POINTER_SIZE = 8


@dataclass(frozen=True)
class CType:
    def size(self) -> Optional[int]:
        return None

    @property
    def is_pointer(self) -> bool:
        return False

    @property
    def is_integer(self) -> bool:
        return False


@dataclass(frozen=True)
class VoidType(CType):
    def __str__(self):
        return "void"


@dataclass(frozen=True)
class IntType(CType):
    """An integer type. ``name`` is the spelling used when printing."""

    name: str = "int"
    nbytes: int = 4
    signed: bool = True

    def size(self):
        return self.nbytes

    @property
    def is_integer(self):
        return True

    @property
    def min_value(self) -> int:
        return -(1 << (8 * self.nbytes - 1)) if self.signed else 0

    @property
    def max_value(self) -> int:
        bits = 8 * self.nbytes
        return (1 << (bits - 1)) - 1 if self.signed else (1 << bits) - 1

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class OpaqueType(CType):
    """Synchronisation objects: mutexes, rwlocks and thread identifiers."""

    name: str
    nbytes: int

    def size(self):
        return self.nbytes

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PointerType(CType):
    target: CType

    def size(self):
        return POINTER_SIZE

    @property
    def is_pointer(self):
        return True

    def __str__(self):
        if isinstance(self.target, FunctionType):
            return f"{self.target.ret} (*)({', '.join(map(str, self.target.params))})"
        return f"{self.target} *"


@dataclass(frozen=True)
class ArrayType(CType):
    elem: CType
    length: int

    def size(self):
        s = self.elem.size()
        return None if s is None else s * self.length

    def __str__(self):
        return f"{self.elem}[{self.length}]"


@dataclass(frozen=True)
class FunctionType(CType):
    ret: CType
    params: Tuple[CType, ...]

    def __str__(self):
        return f"{self.ret} ({', '.join(map(str, self.params))})"


VOID = VoidType()
INT = IntType()
CHAR = IntType("char", 1)
LONG = IntType("long", 8)
UINT = IntType("unsigned", 4, signed=False)
ULONG = IntType("unsigned long", 8, signed=False)
MUTEX = OpaqueType("pthread_mutex_t", 40)
RWLOCK = OpaqueType("pthread_rwlock_t", 56)
THREAD_ID = OpaqueType("pthread_t", 8)
VOID_PTR = PointerType(VOID)

BUILTIN_TYPES = {
    "int": INT,
    "char": CHAR,
    "long": LONG,
    "short": IntType("short", 2),
    "unsigned": UINT,
    "size_t": ULONG,
    "void": VOID,
    "atomic_int": INT,
    "pthread_mutex_t": MUTEX,
    "mutex": MUTEX,
    "pthread_rwlock_t": RWLOCK,
    "rwlock": RWLOCK,
    "pthread_t": THREAD_ID,
    "thread_t": THREAD_ID,
}

# type names that imply the _Atomic qualifier
ATOMIC_TYPE_NAMES = {"atomic_int"}


def element_type(t: CType) -> CType:
    """Innermost element type of a (possibly nested) array."""
    while isinstance(t, ArrayType):
        t = t.elem
    return t


def pointee_size(t: CType) -> int:
    """Scale factor for pointer arithmetic on ``t``."""
    if isinstance(t, PointerType):
        s = t.target.size()
        return s if s else 1
    if isinstance(t, ArrayType):
        s = t.elem.size()
        return s if s else 1
    return 1


def is_thread_entry_type(ft: FunctionType, strict: bool = True) -> bool:
    """``void *f(void *)``; the relaxed check also accepts ``void *f()``."""
    if not (isinstance(ft.ret, PointerType) and ft.ret.target == VOID):
        return False
    if len(ft.params) == 1 and ft.params[0].is_pointer:
        return True
    return not strict and len(ft.params) == 0


def is_lock_type(t: CType) -> bool:
    return t in (MUTEX, RWLOCK)
