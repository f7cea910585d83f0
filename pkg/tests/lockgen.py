"""Random loop-free lock programs and their path-enumerated locksets."""

from __future__ import annotations

from typing import Dict, FrozenSet, List, Set, Tuple

from hypothesis import strategies as st

MUTEXES = ("m0", "m1", "m2")

# statement trees: ("lock", m) | ("unlock", m) | ("mark",) | ("call", h) | ("if", then, else)


def _count_locks(body) -> int:
    n = 0
    for s in body:
        if s[0] in ("lock", "unlock"):
            n += 1
        elif s[0] == "if":
            n += _count_locks(s[1]) + _count_locks(s[2])
    return n


def _stmts(depth: int, helpers: int):
    leaf = st.one_of(
        st.tuples(st.just("lock"), st.sampled_from(MUTEXES)),
        st.tuples(st.just("unlock"), st.sampled_from(MUTEXES)),
        st.just(("mark",)),
    )
    if helpers:
        leaf = st.one_of(leaf, st.tuples(st.just("call"), st.integers(0, helpers - 1)))
    if depth == 0:
        return st.lists(leaf, max_size=4)
    inner = _stmts(depth - 1, helpers)
    item = st.one_of(leaf, st.tuples(st.just("if"), inner, inner))
    return st.lists(item, max_size=5)


@st.composite
def lock_programs(draw, max_sites: int = 3):
    nh = draw(st.integers(0, 2))
    helpers = [draw(_stmts(1, 0)) for _ in range(nh)]
    main = draw(_stmts(2, nh))
    budget = [max_sites]
    helpers = [_cap(h, budget) for h in helpers]
    return _cap(main, budget), helpers


def _cap(body, budget):
    """Turn lock sites beyond the budget into marks."""
    out = []
    for s in body:
        if s[0] in ("lock", "unlock"):
            if budget[0] == 0:
                s = ("mark",)
            else:
                budget[0] -= 1
        elif s[0] == "if":
            s = ("if", _cap(s[1], budget), _cap(s[2], budget))
        out.append(s)
    return out


class Render:
    """C text with one statement per line and the line of every statement."""

    def __init__(self, main, helpers):
        self.lines: List[str] = [f"pthread_mutex_t {m};" for m in MUTEXES] + ["int x;"]
        self.layout: Dict[str, list] = {}  # function -> line of each statement (pairs for ifs)
        self.count = 0
        for i, h in enumerate(helpers):
            self.lines.append(f"void h{i}(void) {{")
            self.layout[f"h{i}"] = self._body(h, 1)
            self.lines.append("}")
        self.lines.append("int main(void) {")
        self.layout["main"] = self._body(main, 1)
        self.lines.append("  x = -1;")
        self.end_line = len(self.lines)
        self.lines += ["  return 0;", "}"]

    def _body(self, body, ind: int) -> list:
        pad = "  " * ind
        out: list = []
        for s in body:
            out.append(len(self.lines) + 1)
            if s[0] == "lock":
                self.lines.append(f"{pad}pthread_mutex_lock(&{s[1]});")
            elif s[0] == "unlock":
                self.lines.append(f"{pad}pthread_mutex_unlock(&{s[1]});")
            elif s[0] == "call":
                self.lines.append(f"{pad}h{s[1]}();")
            elif s[0] == "mark":
                self.count += 1
                self.lines.append(f"{pad}x = {self.count};")
            else:
                self.lines.append(f"{pad}if (__VERIFIER_nondet_int()) {{")
                then = self._body(s[1], ind + 1)
                self.lines.append(f"{pad}}} else {{")
                other = self._body(s[2], ind + 1)
                self.lines.append(f"{pad}}}")
                out[-1] = (then, other)
        return out

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def path_locksets(main, helpers, r: Render) -> Dict[Tuple[Tuple[int, ...], int], Set[FrozenSet[str]]]:
    """Held-lock sets before each mark over every path, keyed by (lines of
    the enclosing helper calls, line of the mark).  Helpers are inlined."""
    seen: Dict[Tuple[Tuple[int, ...], int], Set[FrozenSet[str]]] = {}

    def run(body, lines, held: Set[FrozenSet[str]], stack) -> Set[FrozenSet[str]]:
        cur = held
        for s, ln in zip(body, lines):
            if s[0] == "lock":
                cur = {h | {s[1]} for h in cur}
            elif s[0] == "unlock":
                cur = {h - {s[1]} for h in cur}
            elif s[0] == "mark":
                seen.setdefault((stack, ln), set()).update(cur)
            elif s[0] == "call":
                cur = run(helpers[s[1]], r.layout[f"h{s[1]}"], cur, stack + (ln,))
            else:
                cur = run(s[1], ln[0], cur, stack) | run(s[2], ln[1], cur, stack)
        return cur

    end = run(main, r.layout["main"], {frozenset()}, ())
    seen[((), r.end_line)] = end
    return seen
