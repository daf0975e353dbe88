"""Event ingestion, frequency-truncated vocabulary and the patient-conditions matrix."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np
import scipy.sparse as sp

from .errors import DataError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EventRecord:
    patient_id: str
    code: str
    count: int


@dataclass(frozen=True)
class EventLog:
    """Aggregated (patient, code) counts in first-appearance order."""

    records: tuple[EventRecord, ...]
    dropped_zero: int = 0

    @property
    def n_patients(self) -> int:
        return len({r.patient_id for r in self.records})

    @property
    def n_codes(self) -> int:
        return len({r.code for r in self.records})

    @property
    def total_occurrences(self) -> int:
        return sum(r.count for r in self.records)

    def code_frequencies(self) -> dict[str, int]:
        freq: dict[str, int] = {}
        for r in self.records:
            freq[r.code] = freq.get(r.code, 0) + r.count
        return freq

    def frequency_of(self, code: str) -> int:
        return self.code_frequencies().get(code, 0)


def _aggregate(rows: Iterable[tuple[str, str, int]]) -> EventLog:
    counts: dict[tuple[str, str], int] = {}
    dropped = 0
    for patient, code, count in rows:
        if count == 0:
            dropped += 1
            continue
        key = (patient, code)
        counts[key] = counts.get(key, 0) + count
    if not counts:
        raise DataError("empty event log")
    if dropped:
        log.warning("dropped %d zero-count rows", dropped)
    records = tuple(EventRecord(p, c, n) for (p, c), n in counts.items())
    return EventLog(records, dropped_zero=dropped)


def _parse_count(raw, lineno: int) -> int:
    if raw is None or (isinstance(raw, str) and raw.strip() == ""):
        return 1
    if isinstance(raw, bool):
        raise DataError(f"line {lineno}: count must be an integer, got {raw!r}")
    if isinstance(raw, int):
        value = raw
    else:
        try:
            value = int(str(raw).strip())
        except ValueError:
            raise DataError(f"line {lineno}: count must be an integer, got {raw!r}") from None
    if value < 0:
        raise DataError(f"line {lineno}: negative count {value}")
    return value


def _check_ids(patient, code, lineno: int) -> tuple[str, str]:
    if not isinstance(patient, str) or not patient.strip():
        raise DataError(f"line {lineno}: missing patient_id")
    if not isinstance(code, str) or not code.strip():
        raise DataError(f"line {lineno}: missing code")
    return patient.strip(), code.strip()


def _csv_rows(text: str):
    reader = csv.reader(io.StringIO(text))
    header = None
    for row in reader:
        lineno = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if header is None:
            header = [h.strip() for h in row]
            if "patient_id" not in header or "code" not in header:
                raise DataError(f"line {lineno}: header must name patient_id and code columns")
            ip, ic = header.index("patient_id"), header.index("code")
            icount = header.index("count") if "count" in header else None
            continue
        if len(row) != len(header):
            raise DataError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        patient, code = _check_ids(row[ip], row[ic], lineno)
        count = _parse_count(row[icount] if icount is not None else None, lineno)
        yield patient, code, count


def _jsonl_rows(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise DataError(f"line {lineno}: expected a JSON object")
        patient, code = _check_ids(obj.get("patient_id"), obj.get("code"), lineno)
        yield patient, code, _parse_count(obj.get("count"), lineno)


def ingest_events(source: IO[bytes] | bytes, fmt: str = "csv") -> EventLog:
    """Parse an event log from a byte stream.

    ``fmt`` is ``"csv"`` (header row required, ``count`` column optional) or
    ``"jsonl"``.  Duplicate (patient, code) rows accumulate.  Zero-count rows
    are dropped and tallied; anything malformed raises :class:`DataError`
    naming the line.
    """
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    try:
        text = bytes(data).decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise DataError(f"event log is not valid UTF-8: {exc}") from None
    if fmt == "csv":
        rows = _csv_rows(text)
    elif fmt == "jsonl":
        rows = _jsonl_rows(text)
    else:
        raise ValueError(f"unknown event format {fmt!r}")
    return _aggregate(rows)


def format_for_path(path: str | os.PathLike) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    return "jsonl" if ext in (".jsonl", ".ndjson") else "csv"


def read_events(path: str | os.PathLike) -> EventLog:
    with open(path, "rb") as fh:
        return ingest_events(fh, format_for_path(path))


def write_events(events: EventLog | Iterable[EventRecord], stream: IO[str], fmt: str = "csv") -> None:
    records = events.records if isinstance(events, EventLog) else events
    if fmt == "jsonl":
        for r in records:
            stream.write(json.dumps({"patient_id": r.patient_id, "code": r.code, "count": r.count}) + "\n")
        return
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["patient_id", "code", "count"])
    for r in records:
        writer.writerow([r.patient_id, r.code, r.count])


@dataclass(frozen=True)
class Vocabulary:
    codes: tuple[str, ...]
    frequencies: tuple[int, ...]
    coverage_requested: float
    coverage_achieved: float
    total_occurrences: int
    index_of: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.codes)) != len(self.codes):
            raise ValueError("vocabulary codes must be unique")
        if len(self.frequencies) != len(self.codes):
            raise ValueError("one frequency per code")
        object.__setattr__(self, "index_of", {c: i for i, c in enumerate(self.codes)})

    def __len__(self) -> int:
        return len(self.codes)

    def frequency_of(self, code: str) -> int:
        return self.frequencies[self.index_of[code]]

    def fingerprint(self) -> str:
        return hashlib.sha256("\n".join(self.codes).encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "codes": list(self.codes),
            "frequencies": list(self.frequencies),
            "coverage_requested": self.coverage_requested,
            "coverage_achieved": self.coverage_achieved,
            "total_occurrences": self.total_occurrences,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(
            codes=tuple(d["codes"]),
            frequencies=tuple(int(f) for f in d["frequencies"]),
            coverage_requested=float(d["coverage_requested"]),
            coverage_achieved=float(d["coverage_achieved"]),
            total_occurrences=int(d["total_occurrences"]),
        )


def rank_codes(freq: dict[str, int]) -> list[tuple[str, int]]:
    """Codes by descending frequency, ties broken lexicographically."""
    return sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))


def build_vocabulary(events: EventLog, coverage: float = 0.8) -> Vocabulary:
    """Smallest frequency-ranked prefix of codes covering ``coverage`` of all occurrences."""
    if not 0 < coverage <= 1:
        raise ValueError(f"coverage must be in (0, 1], got {coverage}")
    ranked = rank_codes(events.code_frequencies())
    if not ranked:
        raise DataError("empty event log")
    total = sum(f for _, f in ranked)
    kept, cum = [], 0
    for code, f in ranked:
        kept.append((code, f))
        cum += f
        # same expression as coverage_achieved, so achieved >= requested holds exactly
        if cum / total >= coverage or cum == total:
            break
    return Vocabulary(
        codes=tuple(c for c, _ in kept),
        frequencies=tuple(f for _, f in kept),
        coverage_requested=float(coverage),
        coverage_achieved=cum / total,
        total_occurrences=total,
    )


@dataclass(frozen=True)
class PatientConditionsCorpus:
    """Sparse D x V count matrix over a fixed vocabulary.

    ``dropped_patients`` and ``dropped_tokens`` record what vocabulary
    filtering removed so totals can be reconciled with the source log.
    """

    patient_ids: tuple[str, ...]
    vocabulary: Vocabulary
    counts: sp.csr_matrix
    dropped_patients: int = 0
    dropped_tokens: int = 0

    def __post_init__(self):
        counts = sp.csr_matrix(self.counts, dtype=np.int64)
        counts.sum_duplicates()
        counts.eliminate_zeros()
        counts.sort_indices()
        if counts.shape != (len(self.patient_ids), len(self.vocabulary)):
            raise ValueError(
                f"counts shape {counts.shape} does not match "
                f"{len(self.patient_ids)} patients x {len(self.vocabulary)} codes"
            )
        if counts.nnz and counts.data.min() < 0:
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def n_docs(self) -> int:
        return self.counts.shape[0]

    @property
    def n_codes(self) -> int:
        return self.counts.shape[1]

    @property
    def doc_lengths(self) -> np.ndarray:
        return np.asarray(self.counts.sum(axis=1)).ravel().astype(np.int64)

    @property
    def total_tokens(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        coo = self.counts.tocoo()
        order = np.lexsort((coo.col, coo.row))
        triplets = [[int(coo.row[k]), int(coo.col[k]), int(coo.data[k])] for k in order]
        return {
            "patient_ids": list(self.patient_ids),
            "vocabulary": self.vocabulary.to_dict(),
            "shape": [self.n_docs, self.n_codes],
            "triplets": triplets,
            "dropped_patients": self.dropped_patients,
            "dropped_tokens": self.dropped_tokens,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PatientConditionsCorpus":
        vocab = Vocabulary.from_dict(d["vocabulary"])
        shape = (len(d["patient_ids"]), len(vocab))
        t = np.asarray(d["triplets"], dtype=np.int64).reshape(-1, 3)
        counts = sp.csr_matrix((t[:, 2], (t[:, 0], t[:, 1])), shape=shape)
        return cls(tuple(d["patient_ids"]), vocab, counts,
                   int(d.get("dropped_patients", 0)), int(d.get("dropped_tokens", 0)))

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def build_matrix(events: EventLog, vocab: Vocabulary) -> PatientConditionsCorpus:
    """Count matrix restricted to ``vocab``; patients left with no tokens are dropped."""
    if len(vocab) == 0:
        raise DataError("vocabulary is empty")
    patients: dict[str, int] = {}
    rows, cols, vals = [], [], []
    dropped_tokens = 0
    seen: dict[str, None] = {}
    for r in events.records:
        seen.setdefault(r.patient_id, None)
        j = vocab.index_of.get(r.code)
        if j is None:
            dropped_tokens += r.count
            continue
        i = patients.setdefault(r.patient_id, len(patients))
        rows.append(i)
        cols.append(j)
        vals.append(r.count)
    if not patients:
        raise DataError("no event codes fall inside the vocabulary")
    # keep first-appearance order of the full log, not of the first in-vocabulary record
    order = [p for p in seen if p in patients]
    remap = np.empty(len(patients), dtype=np.int64)
    for new, p in enumerate(order):
        remap[patients[p]] = new
    counts = sp.csr_matrix(
        (np.asarray(vals, dtype=np.int64), (remap[np.asarray(rows, dtype=np.int64)], np.asarray(cols))),
        shape=(len(order), len(vocab)),
    )
    dropped_patients = len(seen) - len(order)
    if dropped_patients:
        log.info("dropped %d patients with no in-vocabulary codes", dropped_patients)
    return PatientConditionsCorpus(tuple(order), vocab, counts, dropped_patients, dropped_tokens)


def corpus_stats(corpus: PatientConditionsCorpus) -> dict:
    lengths = corpus.doc_lengths
    D, V = corpus.counts.shape
    cells = D * V
    return {
        "D": int(D),
        "V": int(V),
        "total_tokens": int(lengths.sum()),
        "mean_row_sum": float(lengths.mean()) if D else 0.0,
        "min_row_sum": int(lengths.min()) if D else 0,
        "max_row_sum": int(lengths.max()) if D else 0,
        "sparsity": 1.0 - corpus.counts.count_nonzero() / cells if cells else 0.0,
    }
