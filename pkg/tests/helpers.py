"""Shared test utilities: corpus paths, oracle freezing and the
domain-soundness comparison between concrete and abstract states."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List

from racerlite.absdomain import BOTTOM, TOP, IntIv, Pointers
from racerlite.frontend import parse_program
from racerlite.oracle import Bounds, enumerate as explore
from racerlite.pipeline import RunConfig, analyse_mode

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FROZEN = Path(__file__).resolve().parent / "data" / "corpus_oracle.json"


def corpus_files() -> List[Path]:
    return sorted(CORPUS.glob("*.c"))


def oracle_table(bounds: Bounds = Bounds()) -> Dict[str, dict]:
    out = {}
    for f in corpus_files():
        v = explore(parse_program(f.read_text()), bounds)
        d = v.to_dict()
        out[f.name] = {"race": d["race"], "exhausted": d["exhausted"],
                       "races": [{"statements": r["statements"], "base": r["base"]} for r in d["races"]]}
    return out


def frozen_oracle() -> Dict[str, dict]:
    return json.loads(FROZEN.read_text())


def frozen_keys(entry: dict) -> set:
    return {(frozenset(r["statements"]), tuple(r["base"])) for r in entry["races"]}


def _contains(av, cv, off) -> bool:
    if av is TOP:
        return True
    if av is BOTTOM:
        return False
    if isinstance(cv, int):
        if isinstance(av, IntIv):
            return cv in av
        return isinstance(av, Pointers) and cv == 0 and av.null
    if isinstance(cv, tuple) and cv[0] == "p":
        if not isinstance(av, Pointers):
            return False
        if cv[1] is None:
            return av.null
        return any(a.base.key() == cv[1] and cv[2] in a.offset for a in av.addrs)
    if isinstance(cv, tuple) and cv[0] == "fn":
        return isinstance(av, Pointers) and any(a.base.kind == "func" and a.base.name == cv[1] for a in av.addrs)
    return True


def domain_violations(path: Path) -> List[str]:
    """Concrete values seen by the single-threaded oracle that fall outside
    the interp backend's under-mode abstraction at the same statement."""
    p = parse_program(path.read_text())
    v = explore(p, Bounds(), single_threaded=True, snapshots=True)
    ph = analyse_mode(p, "under", RunConfig(mode="under"))
    b = ph.threads.backend
    idx: Dict[tuple, list] = {}
    for t, r in ph.threads.results.items():
        for c in b.contexts(r):
            s = ph.program.stmts[c.stmt]
            o = s.origin if s.origin >= 0 else s.sid
            idx.setdefault((t, o), []).append(b.state(r, c))
    bad = []
    for (t, o), snaps in v.state_sets.items():
        states = idx.get((t, o))
        if not states:
            bad.append(f"{path.name}:{p.stmts[o].line}: reached concretely in {t}, unreachable abstractly")
            continue
        for snap in snaps:
            for key, off, cv in snap:
                if cv is None:
                    continue
                ok = False
                for st in states:
                    base = next((x for x in st.values if x.key() == key), None)
                    av = st.values[base] if base is not None else (BOTTOM if key[0] == "dynamic" else TOP)
                    if _contains(av, cv, off):
                        ok = True
                        break
                if not ok:
                    bad.append(f"{path.name}:{p.stmts[o].line}: {key}+{off} = {cv} not abstracted in {t}")
    return bad


if __name__ == "__main__":
    FROZEN.parent.mkdir(exist_ok=True)
    FROZEN.write_text(json.dumps(oracle_table(), indent=1, sort_keys=True) + "\n")
    print(f"wrote {FROZEN}")
