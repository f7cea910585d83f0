"""Sequential-analysis backends behind a common query interface."""

from .alias import AliasBackend, UnionFind, steensgaard_saturate
from .base import (
    Access,
    AccessPair,
    Backend,
    BackendResult,
    Context,
    initial_globals,
    weak_alloc_sites,
)
from .interp import InterpBackend
from .syntactic import SyntacticBackend

BACKENDS = {"interp": InterpBackend, "syntactic": SyntacticBackend, "alias": AliasBackend}


def make_backend(name: str, program, context_depth: int = 1) -> Backend:
    try:
        cls = BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r} (choose from {', '.join(BACKENDS)})") from None
    return cls(program, context_depth)


__all__ = [
    "Access",
    "AccessPair",
    "AliasBackend",
    "BACKENDS",
    "Backend",
    "BackendResult",
    "Context",
    "InterpBackend",
    "SyntacticBackend",
    "UnionFind",
    "initial_globals",
    "make_backend",
    "steensgaard_saturate",
    "weak_alloc_sites",
]
