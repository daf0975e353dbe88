"""Ranked topic listings rendered as side-by-side text tables."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .evaluation import top_indices


@dataclass(frozen=True)
class TopicReportRow:
    topic: int
    entries: tuple[tuple[str, str | None, float], ...]
    cumulative_probability: float

    def to_dict(self) -> dict:
        return {
            "topic": self.topic,
            "entries": [{"code": c, "label": lab, "probability": p} for c, lab, p in self.entries],
            "cumulative_probability": self.cumulative_probability,
        }


def format_probability(p: float) -> str:
    """Three decimals with no leading zero: ``.369``, ``1.000``."""
    s = f"{p:.3f}"
    return s[1:] if s.startswith("0.") else s


def read_label_map(path) -> dict[str, str]:
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"code", "label"} <= set(reader.fieldnames):
            raise DataError(f"{path}: label map needs a 'code,label' header")
        return {row["code"].strip(): row["label"].strip() for row in reader}


def topic_report(phi, codes, labels: dict[str, str] | None = None, top_n: int = 10) -> list[TopicReportRow]:
    phi = np.asarray(phi, dtype=np.float64)
    if len(codes) != phi.shape[1]:
        raise DataError("code list does not match phi width")
    top_n = min(top_n, phi.shape[1])
    rows = []
    for t, row in enumerate(phi):
        idx = top_indices(row, top_n)
        entries = tuple(
            (codes[j], labels.get(codes[j]) if labels else None, float(row[j]))
            for j in idx if row[j] > 0
        )
        rows.append(TopicReportRow(t, entries, float(sum(p for _, _, p in entries))))
    return rows


def _band(rows: list[TopicReportRow]) -> list[str]:
    columns = []
    for r in rows:
        names = [lab or code for code, lab, _ in r.entries]
        probs = [format_probability(p) for _, _, p in r.entries]
        columns.append((f"Topic {r.topic}", names, probs, format_probability(r.cumulative_probability)))
    depth = max(len(c[1]) for c in columns)
    widths = [max([len(c[0])] + [len(n) for n in c[1]]) for c in columns]
    first = "CUMULATIVE PROBABILITY"
    widths[0] = max(widths[0], len(first))

    def line(cells):
        return "  ".join(cells).rstrip()

    out = [line(f"{c[0]:<{w}} {'Prob':>5}" for c, w in zip(columns, widths))]
    for k in range(depth):
        cells = []
        for c, w in zip(columns, widths):
            if k < len(c[1]):
                cells.append(f"{c[1][k]:<{w}} {c[2][k]:>5}")
            else:
                cells.append(" " * (w + 6))
        out.append(line(cells))
    cells = [f"{(first if n == 0 else ''):<{w}} {c[3]:>5}" for n, (c, w) in enumerate(zip(columns, widths))]
    out.append(line(cells))
    return out


def render_table(rows: list[TopicReportRow], per_band: int = 3) -> str:
    """Topics side by side, ``per_band`` per block, with a cumulative footer row."""
    blocks = []
    for start in range(0, len(rows), per_band):
        blocks.append("\n".join(_band(rows[start:start + per_band])))
    return "\n\n".join(blocks) + "\n"


def render_json(rows: list[TopicReportRow]) -> dict:
    return {"topics": [r.to_dict() for r in rows]}

