"""Why the verdict can be ``unknown``.

Two small programs where one approximation alone is not enough.  In the
first, a child allocates memory that its sibling then writes; the
under-approximating run never sees that pointer.  In the second, main
always restores a global under a lock, but the over-approximation cannot
tell and flags a race the explorer never finds.
"""

from pathlib import Path

from racerlite.frontend import parse_program
from racerlite.oracle import enumerate as explore
from racerlite.pipeline import RunConfig, run

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def show(name):
    path = CORPUS / name
    print(f"== {name}")
    for mode in ("under", "over", "combined"):
        for backend in ("interp", "syntactic"):
            v = run(RunConfig(mode=mode, backend=backend), path)
            races = ", ".join(f"{r.classification}:{r.base}" for r in v.reports) or "-"
            print(f"  {mode:8} {backend:9} {v.status:9} {races}")
    truth = explore(parse_program(path.read_text()))
    print(f"  explorer: racy={truth.racy} exhausted={truth.exhausted}")


def main():
    show("fig5a_alloc_in_child.c")
    show("fig5b_atomic_restore.c")


if __name__ == "__main__":
    main()
