"""Bindings of thread and lock functions, loaded from JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, Optional, Tuple, Union


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ThreadFn:
    """A thread create or join function.

    ``entry`` and ``arg`` are unused (None) for join functions.  For the
    shorthand ``create(t)``/``join(t)`` style the thread id is the entry
    point itself, so ``tid == entry``.
    """

    name: str
    entry: Optional[int] = None
    tid: Optional[int] = None
    arg: Optional[int] = None

    def positions(self):
        return [p for p in (self.entry, self.tid, self.arg) if p is not None]


@dataclass(frozen=True)
class LockFn:
    name: str
    lock: int = 0
    blocking: bool = True
    mode: str = "plain"  # read | write | plain
    # value returned on success by non-blocking functions
    success: int = 0


@dataclass(frozen=True)
class ConcurrencyConfig:
    create_fns: Tuple[ThreadFn, ...] = ()
    join_fns: Tuple[ThreadFn, ...] = ()
    lock_fns: Tuple[LockFn, ...] = ()
    unlock_fns: Tuple[LockFn, ...] = ()
    atomic_fns: FrozenSet[str] = frozenset()
    strict_thread_signature: bool = True
    _index: Dict[str, Tuple[str, object]] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        index: Dict[str, Tuple[str, object]] = {}
        groups = [
            ("create", self.create_fns),
            ("join", self.join_fns),
            ("lock", self.lock_fns),
            ("unlock", self.unlock_fns),
            ("atomic", tuple(sorted(self.atomic_fns))),
        ]
        for role, entries in groups:
            for e in entries:
                name = e if isinstance(e, str) else e.name
                if name in index:
                    raise ConfigError(f"function {name!r} bound to more than one role")
                index[name] = (role, e)
        for e in self.lock_fns + self.unlock_fns:
            if e.mode not in ("read", "write", "plain"):
                raise ConfigError(f"{e.name}: bad lock mode {e.mode!r}")
        object.__setattr__(self, "_index", index)

    @property
    def pthreads(self) -> bool:
        """True when the pthreads bindings are present."""
        return any(e.name == "pthread_create" for e in self.create_fns)

    def role_of(self, name: str) -> Tuple[Optional[str], object]:
        return self._index.get(name, (None, None))

    def check_arity(self, name: str, nargs: int) -> None:
        role, entry = self.role_of(name)
        if entry is None or isinstance(entry, str):
            return
        if isinstance(entry, ThreadFn):
            positions = [q for q in (entry.entry, entry.tid) if q is not None]
        else:
            positions = [entry.lock]
        for pos in positions:
            if pos >= nargs:
                raise ConfigError(f"{name}: argument position {pos} invalid for {nargs} arguments")

    # ------------------------------------------------------------------
    @classmethod
    def from_dict(cls, d: dict) -> "ConcurrencyConfig":
        base = cls.default() if d.get("defaults", False) else None

        def threads(key):
            return tuple(
                ThreadFn(e["name"], e.get("entry"), e.get("tid"), e.get("arg")) for e in d.get(key, [])
            )

        def locks(key):
            return tuple(
                LockFn(
                    e["name"],
                    e.get("lock", 0),
                    e.get("blocking", True),
                    e.get("mode", "plain"),
                    e.get("success", 0),
                )
                for e in d.get(key, [])
            )

        cfg = dict(
            create_fns=threads("create"),
            join_fns=threads("join"),
            lock_fns=locks("lock"),
            unlock_fns=locks("unlock"),
            atomic_fns=frozenset(d.get("atomic", [])),
            strict_thread_signature=d.get("strict_thread_signature", True),
        )
        if base is not None:
            overridden = {e.name for k in ("create_fns", "join_fns", "lock_fns", "unlock_fns") for e in cfg[k]}
            overridden |= cfg["atomic_fns"]
            for k in ("create_fns", "join_fns", "lock_fns", "unlock_fns"):
                kept = tuple(e for e in getattr(base, k) if e.name not in overridden)
                cfg[k] = kept + cfg[k]
            cfg["atomic_fns"] = frozenset(a for a in base.atomic_fns if a not in overridden) | cfg["atomic_fns"]
        return cls(**cfg)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ConcurrencyConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def default(cls) -> "ConcurrencyConfig":
        """pthreads bindings plus the ``create/join/lock/unlock`` shorthand."""
        text = resources.files("racerlite.data").joinpath("pthreads.json").read_text("utf-8")
        d = json.loads(text)
        d["defaults"] = False
        return cls.from_dict(d)

    @classmethod
    def pthreads_only(cls) -> "ConcurrencyConfig":
        d = json.loads(resources.files("racerlite.data").joinpath("pthreads.json").read_text("utf-8"))
        for key in ("create", "join", "lock", "unlock"):
            d[key] = [e for e in d[key] if e["name"].startswith("pthread_")]
        return cls.from_dict(d)
