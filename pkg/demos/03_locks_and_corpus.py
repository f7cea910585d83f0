"""Locksets, read-write locks and the annotated corpus.

Prints the per-context locksets for a reader/writer program, then scores
every corpus file against its expected verdict.
"""

from pathlib import Path

from racerlite.conc import format_locksets
from racerlite.corpus import run_corpus
from racerlite.frontend import parse_program
from racerlite.pipeline import RunConfig, analyse_mode

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def main():
    path = CORPUS / "rwlock_read_write.c"
    print(path.read_text())
    ph = analyse_mode(parse_program(path.read_text()), "under", RunConfig(mode="under"))
    print(format_locksets(ph.program, ph.locksets))
    # A read lock on one side and a write lock on the other protect the
    # access; two read locks would not.
    print("reports:", [str(r.base) for r in ph.detection.reports] or "none")
    print()

    res = run_corpus(CORPUS, RunConfig(), jobs=2)
    print(res.table())


if __name__ == "__main__":
    main()
