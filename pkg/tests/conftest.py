from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from emrlda.corpus import PatientConditionsCorpus, Vocabulary, ingest_events

DATA = Path(__file__).parent / "data"


def events_from_rows(rows, header="patient_id,code,count"):
    text = header + "\n" + "\n".join(",".join(str(c) for c in r) for r in rows) + "\n"
    return ingest_events(text.encode())


def corpus_from_dense(counts, codes=None) -> PatientConditionsCorpus:
    """Corpus over an arbitrary dense matrix; vocabulary order is taken as given."""
    counts = np.asarray(counts, dtype=np.int64)
    D, V = counts.shape
    codes = tuple(codes or (f"c{j}" for j in range(V)))
    freq = tuple(int(f) for f in counts.sum(axis=0))
    vocab = Vocabulary(codes, freq, 1.0, 1.0, int(counts.sum()))
    return PatientConditionsCorpus(tuple(f"p{i}" for i in range(D)), vocab, sp.csr_matrix(counts))


@pytest.fixture
def head_tail_path():
    return DATA / "head_tail_events.csv"


@pytest.fixture
def small_corpus():
    return corpus_from_dense([[2, 0, 1], [0, 3, 1], [1, 1, 0], [0, 0, 4]])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
