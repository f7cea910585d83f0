"""Mini-C frontend: parsing, lowering to CFG form and source transforms."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from .ast import print_unit
from .config import ConcurrencyConfig, ConfigError, LockFn, ThreadFn
from .ir import IRProgram
from .lower import Lowering, SemanticError
from .parser import ParseError, parse_text
from .transforms import detect_active_waiting, loop_heads, make_extensive, unfold_loops


@dataclass
class SourceProgram:
    files: List[Tuple[str, str]]
    concurrency_config: ConcurrencyConfig = field(default_factory=ConcurrencyConfig.default)

    def __post_init__(self):
        if not self.files:
            raise ValueError("a source program needs at least one file")

    @classmethod
    def from_text(cls, text: str, path: str = "<input>", config: Optional[ConcurrencyConfig] = None):
        return cls([(path, text)], config or ConcurrencyConfig.default())

    @classmethod
    def from_paths(cls, paths: Sequence[Union[str, Path]], config: Optional[ConcurrencyConfig] = None):
        files = [(str(p), Path(p).read_text(encoding="utf-8")) for p in paths]
        return cls(files, config or ConcurrencyConfig.default())


def parse_program(src: Union[SourceProgram, str]) -> IRProgram:
    """Parse and lower a program.  A bare string is treated as one file
    analysed with the default configuration."""
    if isinstance(src, str):
        src = SourceProgram.from_text(src)
    units = [(path, parse_text(text, path)) for path, text in src.files]
    return Lowering(units, src.concurrency_config).run()


__all__ = [
    "ConcurrencyConfig",
    "ConfigError",
    "IRProgram",
    "LockFn",
    "ParseError",
    "SemanticError",
    "SourceProgram",
    "ThreadFn",
    "detect_active_waiting",
    "loop_heads",
    "make_extensive",
    "parse_program",
    "parse_text",
    "print_unit",
    "unfold_loops",
]
