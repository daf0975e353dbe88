"""LDA fit by collapsed Gibbs sampling with burn-in, thinning and sample averaging.

Randomness comes from a single ``numpy.random.Generator`` over PCG64.  Each
sweep draws one uniform per token up front and hands them to the kernel, so
the compiled and pure-Python kernels consume identical random streams.
"""
from __future__ import annotations

import hashlib
import json
import logging
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from . import kernels
from .corpus import PatientConditionsCorpus
from .errors import ConfigError, DataError, InvariantError

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.PCG64"


@dataclass(frozen=True)
class Hyperparameters:
    """Model and protocol settings.

    ``alpha`` (patient-topic concentration) defaults to ``50 / K``; ``beta``
    (topic-code concentration) to 0.1.  The protocol defaults discard 4000
    sweeps and then keep 4000 samples spaced 100 sweeps apart.
    """

    K: int
    alpha: Optional[float] = None
    beta: float = 0.1
    burn_in_sweeps: int = 4000
    n_saved_samples: int = 4000
    thinning_interval: int = 100
    seed: int = 0
    trace_every: int = 10

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(self, "alpha", 50.0 / self.K if self.K > 0 else 0.0)
        if not isinstance(self.K, (int, np.integer)) or self.K < 1:
            raise ConfigError(f"K must be a positive integer, got {self.K!r}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.burn_in_sweeps < 0:
            raise ConfigError("burn_in_sweeps must be non-negative")
        if self.n_saved_samples < 1:
            raise ConfigError("n_saved_samples must be at least 1")
        if self.thinning_interval < 1:
            raise ConfigError("thinning_interval must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.trace_every < 1:
            raise ConfigError("trace_every must be at least 1")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def total_sweeps(self) -> int:
        return self.burn_in_sweeps + self.n_saved_samples * self.thinning_interval

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rng"] = RNG_ALGORITHM
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparameters":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


@dataclass
class SamplerState:
    """Token assignments and the count tables they imply.

    Tokens are stored flat: ``word[i]`` and ``doc[i]`` give the code and
    patient of token ``i`` and ``doc_start[d]:doc_start[d+1]`` is the slice of
    patient ``d``.
    """

    word: np.ndarray
    doc: np.ndarray
    doc_start: np.ndarray
    z: np.ndarray
    n_dt: np.ndarray
    n_tw: np.ndarray
    n_t: np.ndarray
    rng: np.random.Generator = field(repr=False)
    sweep_index: int = 0

    @property
    def K(self) -> int:
        return self.n_t.shape[0]

    @property
    def V(self) -> int:
        return self.n_tw.shape[1]

    @property
    def total_tokens(self) -> int:
        return self.z.shape[0]

    def topics_of(self, patient: int) -> np.ndarray:
        return self.z[self.doc_start[patient]:self.doc_start[patient + 1]]

    def copy(self) -> "SamplerState":
        rng = np.random.Generator(np.random.PCG64())
        rng.bit_generator.state = self.rng.bit_generator.state
        return SamplerState(self.word.copy(), self.doc.copy(), self.doc_start.copy(), self.z.copy(),
                            self.n_dt.copy(), self.n_tw.copy(), self.n_t.copy(), rng, self.sweep_index)


def expand_tokens(corpus: PatientConditionsCorpus) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Token arrays in patient-major, vocabulary-index order with repeats consecutive."""
    counts = corpus.counts
    codes = np.repeat(counts.indices, counts.data).astype(np.int32)
    lengths = corpus.doc_lengths
    doc = np.repeat(np.arange(counts.shape[0]), lengths).astype(np.int32)
    doc_start = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    return codes, doc, doc_start


def count_tables(word, doc, z, D: int, K: int, V: int):
    """Rebuild (n_dt, n_tw, n_t) from scratch."""
    n_dt = np.zeros((D, K), dtype=np.int64)
    n_tw = np.zeros((K, V), dtype=np.int64)
    np.add.at(n_dt, (doc, z), 1)
    np.add.at(n_tw, (z, word), 1)
    return n_dt, n_tw, n_tw.sum(axis=1)


def init_state(corpus: PatientConditionsCorpus, hyper: Hyperparameters) -> SamplerState:
    if corpus.n_docs == 0 or corpus.total_tokens == 0:
        raise DataError("corpus is empty")
    word, doc, doc_start = expand_tokens(corpus)
    if hyper.K > word.shape[0]:
        warnings.warn(f"K={hyper.K} exceeds the {word.shape[0]} tokens; some topics will be empty",
                      stacklevel=2)
    rng = np.random.Generator(np.random.PCG64(hyper.seed))
    z = rng.integers(0, hyper.K, size=word.shape[0]).astype(np.int32)
    n_dt, n_tw, n_t = count_tables(word, doc, z, corpus.n_docs, hyper.K, corpus.n_codes)
    return SamplerState(word, doc, doc_start, z, n_dt, n_tw, n_t, rng)


def conditional_distribution(state: SamplerState, patient: int, position: int, code: int,
                             hyper: Hyperparameters) -> np.ndarray:
    """Full conditional over topics for one token, its own assignment excluded."""
    D = state.n_dt.shape[0]
    if not 0 <= patient < D:
        raise IndexError(f"patient {patient} out of range [0, {D})")
    start, stop = state.doc_start[patient], state.doc_start[patient + 1]
    if not 0 <= position < stop - start:
        raise IndexError(f"position {position} out of range for patient {patient} ({stop - start} tokens)")
    i = start + position
    if not 0 <= code < state.V:
        raise IndexError(f"code {code} out of range [0, {state.V})")
    if state.word[i] != code:
        raise ValueError(f"token {position} of patient {patient} is code {state.word[i]}, not {code}")
    old = state.z[i]
    n_dt = state.n_dt[patient].astype(np.float64)
    n_tw = state.n_tw[:, code].astype(np.float64)
    n_t = state.n_t.astype(np.float64)
    n_dt[old] -= 1
    n_tw[old] -= 1
    n_t[old] -= 1
    weights = (n_dt + hyper.alpha) * (n_tw + hyper.beta) / (n_t + state.V * hyper.beta)
    return weights / weights.sum()


def check_counts(state: SamplerState) -> None:
    """Raise :class:`InvariantError` unless the count tables agree with ``z``."""
    D = state.n_dt.shape[0]
    if state.z.size and (state.z.min() < 0 or state.z.max() >= state.K):
        raise InvariantError("topic assignment out of range")
    n_dt, n_tw, n_t = count_tables(state.word, state.doc, state.z, D, state.K, state.V)
    if not (np.array_equal(n_dt, state.n_dt) and np.array_equal(n_tw, state.n_tw)
            and np.array_equal(n_t, state.n_t)):
        raise InvariantError(f"count tables diverged from assignments after sweep {state.sweep_index}")
    if int(state.n_t.sum()) != state.total_tokens:
        raise InvariantError("topic totals do not sum to the token count")


def gibbs_sweep(state: SamplerState, corpus: PatientConditionsCorpus | None, hyper: Hyperparameters,
                check: bool = False, sweep_fn: Callable | None = None) -> SamplerState:
    """Resample every token once, in token order, updating the state in place.

    ``corpus`` is accepted for interface symmetry; the state already carries
    the expanded tokens.  ``sweep_fn`` overrides the kernel backend.
    """
    if corpus is not None and corpus.total_tokens != state.total_tokens:
        raise DataError("state was not built from this corpus")
    uniforms = state.rng.random(state.total_tokens)
    (sweep_fn or kernels.sweep)(state.word, state.doc, state.z, state.n_dt, state.n_tw, state.n_t,
                                hyper.alpha, hyper.beta, uniforms)
    state.sweep_index += 1
    if check:
        check_counts(state)
    return state


def estimate_phi(state: SamplerState, hyper: Hyperparameters) -> np.ndarray:
    phi = (state.n_tw + hyper.beta) / (state.n_t[:, None] + state.V * hyper.beta)
    return phi / phi.sum(axis=1, keepdims=True)


def estimate_theta(state: SamplerState, hyper: Hyperparameters) -> np.ndarray:
    lengths = state.n_dt.sum(axis=1)
    theta = (state.n_dt + hyper.alpha) / (lengths[:, None] + state.K * hyper.alpha)
    return theta / theta.sum(axis=1, keepdims=True)


def log_likelihood(state: SamplerState, hyper: Hyperparameters) -> float:
    """Collapsed log p(codes, z | alpha, beta)."""
    K, V = state.K, state.V
    a, b = hyper.alpha, hyper.beta
    topic_part = (K * (gammaln(V * b) - V * gammaln(b))
                  + gammaln(state.n_tw + b).sum()
                  - gammaln(state.n_t + V * b).sum())
    D = state.n_dt.shape[0]
    lengths = state.n_dt.sum(axis=1)
    doc_part = (D * (gammaln(K * a) - K * gammaln(a))
                + gammaln(state.n_dt + a).sum()
                - gammaln(lengths + K * a).sum())
    return float(topic_part + doc_part)


@dataclass(frozen=True)
class TopicModel:
    phi: np.ndarray
    theta: np.ndarray
    hyper: Hyperparameters
    n_samples_averaged: int
    codes: tuple[str, ...]
    provenance: str

    @property
    def K(self) -> int:
        return self.phi.shape[0]

    @property
    def V(self) -> int:
        return self.phi.shape[1]

    def vocabulary_hash(self) -> str:
        return hashlib.sha256("\n".join(self.codes).encode("utf-8")).hexdigest()

    def to_dict(self, include_theta: bool = False) -> dict:
        d = {
            "format": "emrlda.topic_model/1",
            "hyperparameters": self.hyper.to_dict(),
            "vocabulary_hash": self.vocabulary_hash(),
            "codes": list(self.codes),
            "K": int(self.phi.shape[0]),
            "V": int(self.phi.shape[1]),
            "phi": self.phi.tolist(),
            "n_samples_averaged": self.n_samples_averaged,
            "corpus_fingerprint": self.provenance,
        }
        if include_theta:
            d["theta"] = self.theta.tolist()
        return d

    def to_json(self, include_theta: bool = False) -> str:
        return json.dumps(self.to_dict(include_theta), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "TopicModel":
        phi = np.asarray(d["phi"], dtype=np.float64)
        if phi.ndim != 2 or phi.shape[0] < 1:
            raise DataError("model phi must be a non-empty K x V matrix")
        theta = np.asarray(d.get("theta", np.empty((0, phi.shape[0]))), dtype=np.float64)
        codes = tuple(d.get("codes") or (str(j) for j in range(phi.shape[1])))
        if len(codes) != phi.shape[1]:
            raise DataError("model code list does not match phi width")
        return cls(phi, theta, Hyperparameters.from_dict(d["hyperparameters"]),
                   int(d["n_samples_averaged"]), codes, d.get("corpus_fingerprint", ""))


def run(corpus: PatientConditionsCorpus, hyper: Hyperparameters,
        progress_sink: Callable[[int, float], None] | None = None,
        check_invariants: bool = False, sweep_fn: Callable | None = None) -> TopicModel:
    """Burn in, then save a (phi, theta) sample every ``thinning_interval`` sweeps.

    The returned model holds the element-wise mean of the saved samples with
    rows renormalized.  ``progress_sink`` gets ``(sweep_index, log_likelihood)``
    every ``hyper.trace_every`` sweeps and after the final sweep.
    """
    state = init_state(corpus, hyper)
    phi_sum = np.zeros((hyper.K, corpus.n_codes))
    theta_sum = np.zeros((corpus.n_docs, hyper.K))
    saved = 0
    last = hyper.total_sweeps
    for s in range(1, last + 1):
        gibbs_sweep(state, None, hyper, check=check_invariants, sweep_fn=sweep_fn)
        if s > hyper.burn_in_sweeps and (s - hyper.burn_in_sweeps) % hyper.thinning_interval == 0:
            phi_sum += estimate_phi(state, hyper)
            theta_sum += estimate_theta(state, hyper)
            saved += 1
        if progress_sink is not None and (s % hyper.trace_every == 0 or s == last):
            progress_sink(s, log_likelihood(state, hyper))
    if saved != hyper.n_saved_samples:
        raise InvariantError(f"saved {saved} samples, expected {hyper.n_saved_samples}")
    phi = phi_sum / phi_sum.sum(axis=1, keepdims=True)
    theta = theta_sum / theta_sum.sum(axis=1, keepdims=True)
    log.debug("fit done: %d sweeps, %d samples averaged, backend=%s", last, saved, kernels.BACKEND)
    return TopicModel(phi, theta, hyper, saved, corpus.vocabulary.codes, corpus.fingerprint())
