"""Time one Gibbs sweep with the compiled kernel and the pure-Python fallback.

    python3 benchmarks/bench_sweep.py --patients 500 --topics 5 --sweeps 5

Both backends start from the same state and must end in the same state;
the script exits non-zero if they disagree.
"""
import argparse
import sys
import time

import numpy as np

from emrlda import kernels
from emrlda.sampler import Hyperparameters, gibbs_sweep, init_state
from emrlda.synth import GeneratorConfig, corpus_from_counts, simulate


def time_backend(corpus, hyper, sweep_fn, sweeps):
    state = init_state(corpus, hyper)
    t0 = time.perf_counter()
    for _ in range(sweeps):
        gibbs_sweep(state, None, hyper, sweep_fn=sweep_fn)
    return (time.perf_counter() - t0) / sweeps, state


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--patients", type=int, default=500)
    ap.add_argument("--codes", type=int, default=50)
    ap.add_argument("--topics", type=int, default=5)
    ap.add_argument("--mean-length", type=float, default=100.0)
    ap.add_argument("--sweeps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    cfg = GeneratorConfig(k=args.topics, v=args.codes, d=args.patients, mean_length=args.mean_length, seed=args.seed)
    _, counts, codes, patients = simulate(cfg)
    corpus, _ = corpus_from_counts(counts, codes, patients)
    hyper = Hyperparameters(K=args.topics, seed=args.seed)
    print(f"D={corpus.n_docs} V={corpus.n_codes} K={args.topics} tokens={corpus.total_tokens}")

    py_t, py_state = time_backend(corpus, hyper, kernels.python_sweep, args.sweeps)
    print(f"python  {py_t * 1e3:10.2f} ms/sweep  {corpus.total_tokens / py_t:14,.0f} tokens/s")
    if kernels.compiled_sweep is None:
        print("compiled kernel not built; reinstall without EMRLDA_NO_EXT")
        return 0
    cy_t, cy_state = time_backend(corpus, hyper, kernels.compiled_sweep, args.sweeps)
    print(f"cython  {cy_t * 1e3:10.2f} ms/sweep  {corpus.total_tokens / cy_t:14,.0f} tokens/s")
    print(f"speedup {py_t / cy_t:10.1f}x")
    if not (np.array_equal(py_state.z, cy_state.z) and np.array_equal(py_state.n_tw, cy_state.n_tw)):
        print("backends disagree", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
