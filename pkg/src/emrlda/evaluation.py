"""Topic quality: Jensen-Shannon inter-topic distances and tightness reports."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)
SUM_TOL = 1e-6


def _as_distribution(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"{name} must be a non-empty vector")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has negative or non-finite entries")
    total = x.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"{name} sums to {total}, not 1")
    return x / total


def _kl_to_mean(p: np.ndarray, m: np.ndarray) -> float:
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / m[nz])))


def jsd(x, y) -> float:
    """Jensen-Shannon divergence in nats, in [0, ln 2].

    Inputs within 1e-6 of summing to one are renormalized; zero entries
    contribute nothing to their own sum.
    """
    x = _as_distribution(x, "x")
    y = _as_distribution(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    m = 0.5 * (x + y)
    value = 0.5 * _kl_to_mean(x, m) + 0.5 * _kl_to_mean(y, m)
    return min(max(value, 0.0), LN2)


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray

    @property
    def k(self) -> int:
        return self.values.shape[0]

    def upper(self) -> np.ndarray:
        return self.values[np.triu_indices(self.k, k=1)]

    def to_dict(self) -> dict:
        return {"k": self.k, "values": self.values.tolist()}

    def to_table(self) -> str:
        head = "      " + "".join(f"{j:>7d}" for j in range(self.k))
        lines = [head]
        for i, row in enumerate(self.values):
            lines.append(f"{i:>5d} " + "".join(f"{v:7.3f}" for v in row))
        return "\n".join(lines)


def inter_topic_distances(phi) -> DistanceMatrix:
    phi = np.asarray(phi, dtype=np.float64)
    K = phi.shape[0]
    values = np.zeros((K, K))
    for i in range(K):
        for j in range(i + 1, K):
            values[i, j] = values[j, i] = jsd(phi[i], phi[j])
    return DistanceMatrix(values)


@dataclass(frozen=True)
class DistinctivenessSummary:
    mean: float
    median: float
    min: float

    def line(self) -> str:
        return f"mean={self.mean:.3f} median={self.median:.3f} min={self.min:.3f}"

    def to_dict(self) -> dict:
        return {"mean": self.mean, "median": self.median, "min": self.min}


def distinctiveness_summary(d: DistanceMatrix) -> DistinctivenessSummary:
    if d.k < 2:
        raise ValueError("no distinct pairs")
    pairs = d.upper()
    return DistinctivenessSummary(float(pairs.mean()), float(np.median(pairs)), float(pairs.min()))


@dataclass(frozen=True)
class TightnessRow:
    topic: int
    n_above_threshold: int
    top_n_mass: float


@dataclass(frozen=True)
class TightnessReport:
    rows: tuple[TightnessRow, ...]
    threshold: float
    top_n: int

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "top_n": self.top_n,
            "topics": [
                {"topic": r.topic, "n_above_threshold": r.n_above_threshold, "top_n_mass": r.top_n_mass}
                for r in self.rows
            ],
        }

    def to_table(self) -> str:
        lines = [f"topic  n>{self.threshold:g}  top{self.top_n}_mass"]
        width = len(f"n>{self.threshold:g}")
        for r in self.rows:
            lines.append(f"{r.topic:>5d}  {r.n_above_threshold:>{width}d}  {r.top_n_mass:.3f}")
        return "\n".join(lines)


def top_indices(row: np.ndarray, n: int) -> np.ndarray:
    """Indices of the ``n`` largest entries, ties resolved by lower index."""
    return np.argsort(-row, kind="stable")[:n]


def tightness(phi, threshold: float = 0.01, top_n: int = 10) -> TightnessReport:
    phi = np.asarray(phi, dtype=np.float64)
    V = phi.shape[1]
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    if not 1 <= top_n <= V:
        raise ValueError(f"top_n must be in [1, {V}], got {top_n}")
    rows = []
    for t, row in enumerate(phi):
        mass = float(row[top_indices(row, top_n)].sum())
        rows.append(TightnessRow(t, int(np.count_nonzero(row > threshold)), min(mass, 1.0)))
    return TightnessReport(tuple(rows), threshold, top_n)


def evaluation_dict(phi, threshold: float = 0.01, top_n: int = 10) -> dict:
    d = inter_topic_distances(phi)
    return {
        "distinctiveness": distinctiveness_summary(d).to_dict(),
        "distances": d.to_dict(),
        "tightness": tightness(phi, threshold, top_n).to_dict(),
    }


def evaluation_json(phi, threshold: float = 0.01, top_n: int = 10) -> str:
    return json.dumps(evaluation_dict(phi, threshold, top_n), indent=1) + "\n"
