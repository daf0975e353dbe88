"""Synthetic corpora drawn from the LDA generative process, and topic matching."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.stats import nbinom

from .corpus import EventRecord, PatientConditionsCorpus, Vocabulary, rank_codes
from .errors import ConfigError
from .evaluation import jsd


@dataclass(frozen=True)
class GeneratorConfig:
    k: int = 5
    v: int = 50
    d: int = 2000
    concentration: float = 0.05
    alpha: float = 0.5
    mean_length: float = 100.0
    dispersion: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.v < 2:
            raise ConfigError("v must be at least 2")
        if self.d < 1:
            raise ConfigError("d must be at least 1")
        if not (self.concentration > 0 and self.alpha > 0):
            raise ConfigError("concentration and alpha must be positive")
        if not (self.mean_length > 0 and self.dispersion > 0):
            raise ConfigError("mean_length and dispersion must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def synthetic_codes(v: int) -> tuple[str, ...]:
    width = len(str(v - 1))
    return tuple(f"C{j:0{width}d}" for j in range(v))


def synthetic_patients(d: int) -> tuple[str, ...]:
    width = max(5, len(str(d)))
    return tuple(f"P{i + 1:0{width}d}" for i in range(d))


def _child_rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def make_ground_truth_topics(k: int, v: int, concentration: float, seed: int | np.random.Generator) -> np.ndarray:
    """``k`` topics drawn from a symmetric Dirichlet over ``v`` codes."""
    if k < 1 or v < 2:
        raise ValueError("need k >= 1 and v >= 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    phi = rng.dirichlet(np.full(v, float(concentration)), size=k)
    return phi / phi.sum(axis=1, keepdims=True)


def draw_lengths(rng: np.random.Generator, d: int, mean: float, dispersion: float) -> np.ndarray:
    """Negative-binomial document lengths conditioned on being at least 1.

    Sampled by inverting the CDF above the zero mass, which has the same law
    as redrawing zeros but terminates for any mean.
    """
    p = dispersion / (dispersion + mean)
    p0 = nbinom.cdf(0, dispersion, p)
    u = rng.uniform(p0, 1.0, size=d)
    return np.maximum(nbinom.ppf(u, dispersion, p), 1).astype(np.int64)


def generate_counts(phi_star: np.ndarray, d: int, alpha: float, length_dist: tuple[float, float],
                    seed: int | np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Dense D x V counts in generator code order, plus the true mixtures.

    Per document, the topic of each token is drawn from theta and its code
    from that topic's row; tokens are aggregated by multinomial draws, which
    is the same distribution as drawing token by token.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    phi_star = np.asarray(phi_star, dtype=np.float64)
    K, V = phi_star.shape
    lengths = draw_lengths(rng, d, *length_dist)
    theta = rng.dirichlet(np.full(K, float(alpha)), size=d) if K > 1 else np.ones((d, 1))
    counts = np.zeros((d, V), dtype=np.int64)
    for i in range(d):
        per_topic = rng.multinomial(lengths[i], theta[i])
        for t in np.flatnonzero(per_topic):
            counts[i] += rng.multinomial(per_topic[t], phi_star[t])
    return counts, theta


def corpus_from_counts(counts: np.ndarray, codes: tuple[str, ...], patients: tuple[str, ...]
                       ) -> tuple[PatientConditionsCorpus, np.ndarray]:
    """Wrap generator-order counts as a corpus with a frequency-ranked vocabulary.

    Returns the corpus and ``order``, where vocabulary column ``j`` is
    generator code ``order[j]``.  Codes that were never drawn stay in the
    vocabulary with frequency 0.
    """
    freq = counts.sum(axis=0)
    ranked = rank_codes({c: int(f) for c, f in zip(codes, freq)})
    index = {c: j for j, c in enumerate(codes)}
    order = np.array([index[c] for c, _ in ranked], dtype=np.int64)
    total = int(freq.sum())
    vocab = Vocabulary(tuple(c for c, _ in ranked), tuple(f for _, f in ranked), 1.0, 1.0, total)
    return PatientConditionsCorpus(patients, vocab, sp.csr_matrix(counts[:, order])), order


def generate_corpus(phi_star, d: int, alpha: float, length_dist: tuple[float, float],
                    seed: int | np.random.Generator, codes: tuple[str, ...] | None = None
                    ) -> tuple[PatientConditionsCorpus, np.ndarray]:
    """Draw ``d`` patients; returns the corpus and theta_star.

    The corpus vocabulary is frequency-ranked, so its columns are a
    permutation of ``phi_star``'s; use :func:`align_columns` before comparing.
    """
    phi_star = np.asarray(phi_star, dtype=np.float64)
    codes = codes or synthetic_codes(phi_star.shape[1])
    counts, theta = generate_counts(phi_star, d, alpha, length_dist, seed)
    corpus, _ = corpus_from_counts(counts, codes, synthetic_patients(d))
    return corpus, theta


def align_columns(phi: np.ndarray, from_codes, to_codes) -> np.ndarray:
    """Reorder ``phi`` columns from one code list to another, renormalizing rows.

    Codes in ``to_codes`` absent from ``from_codes`` get zero mass.
    """
    phi = np.asarray(phi, dtype=np.float64)
    index = {c: j for j, c in enumerate(from_codes)}
    out = np.zeros((phi.shape[0], len(to_codes)))
    for j, c in enumerate(to_codes):
        if c in index:
            out[:, j] = phi[:, index[c]]
    sums = out.sum(axis=1, keepdims=True)
    return np.divide(out, sums, out=np.full_like(out, 1.0 / len(to_codes)), where=sums > 0)


@dataclass(frozen=True)
class GroundTruth:
    phi_star: np.ndarray
    theta_star: np.ndarray
    codes: tuple[str, ...]
    config: GeneratorConfig

    def to_dict(self) -> dict:
        return {
            "format": "emrlda.ground_truth/1",
            "generator_config": self.config.to_dict(),
            "codes": list(self.codes),
            "phi_star": self.phi_star.tolist(),
            "theta_star": self.theta_star.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(np.asarray(d["phi_star"], dtype=np.float64), np.asarray(d["theta_star"], dtype=np.float64),
                   tuple(d["codes"]), GeneratorConfig.from_dict(d["generator_config"]))


def simulate(config: GeneratorConfig) -> tuple[GroundTruth, np.ndarray, tuple[str, ...], tuple[str, ...]]:
    """Run the generator end to end: (truth, dense counts, codes, patient ids)."""
    topic_rng, corpus_rng = _child_rngs(config.seed, 2)
    phi_star = make_ground_truth_topics(config.k, config.v, config.concentration, topic_rng)
    counts, theta = generate_counts(phi_star, config.d, config.alpha,
                                    (config.mean_length, config.dispersion), corpus_rng)
    codes = synthetic_codes(config.v)
    return GroundTruth(phi_star, theta, codes, config), counts, codes, synthetic_patients(config.d)


def counts_to_events(counts: np.ndarray, codes, patients) -> list[EventRecord]:
    records = []
    for i, row in enumerate(counts):
        for j in np.flatnonzero(row):
            records.append(EventRecord(patients[i], codes[j], int(row[j])))
    return records


@dataclass(frozen=True)
class TopicMatching:
    assignment: dict[int, int]
    per_pair_jsd: tuple[float, ...]
    mean_matched_jsd: float

    @property
    def max_matched_jsd(self) -> float:
        return max(self.per_pair_jsd)

    def to_dict(self) -> dict:
        return {
            "assignment": {str(k): v for k, v in self.assignment.items()},
            "per_pair_jsd": list(self.per_pair_jsd),
            "mean_matched_jsd": self.mean_matched_jsd,
        }


def jsd_cost(phi_hat, phi_star) -> np.ndarray:
    phi_hat = np.asarray(phi_hat, dtype=np.float64)
    phi_star = np.asarray(phi_star, dtype=np.float64)
    if phi_hat.shape[1] != phi_star.shape[1]:
        raise ValueError(f"vocabulary size mismatch: {phi_hat.shape[1]} vs {phi_star.shape[1]}")
    return np.array([[jsd(a, b) for b in phi_star] for a in phi_hat])


def greedy_assignment(cost: np.ndarray) -> dict[int, int]:
    """Repeatedly take the cheapest pair whose row and column are both unused.

    Equal costs resolve to the lower row, then the lower column.
    """
    cost = np.asarray(cost, dtype=np.float64)
    K, Ks = cost.shape
    flat = sorted((cost[i, j], i, j) for i in range(K) for j in range(Ks))
    used_rows, used_cols = set(), set()
    assignment = {}
    for _, i, j in flat:
        if i in used_rows or j in used_cols:
            continue
        assignment[i] = j
        used_rows.add(i)
        used_cols.add(j)
        if len(assignment) == min(K, Ks):
            break
    return dict(sorted(assignment.items()))


def match_topics(phi_hat, phi_star) -> TopicMatching:
    """Greedy JSD matching of recovered topics to true topics.

    Surplus topics on either side stay unmatched.
    """
    cost = jsd_cost(phi_hat, phi_star)
    assignment = greedy_assignment(cost)
    per_pair = tuple(float(cost[i, j]) for i, j in assignment.items())
    return TopicMatching(assignment, per_pair, float(np.mean(per_pair)))
