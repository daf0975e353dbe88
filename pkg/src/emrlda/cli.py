"""Command-line entry point: ``emrlda fit|report|eval|synth|stats``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import io
import json
import logging
import os
import sys
import tempfile
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import click

from . import kernels
from .config import RunConfig, load_config
from .corpus import PatientConditionsCorpus, build_matrix, build_vocabulary, corpus_stats, read_events, write_events
from .errors import ConfigError, DataError, InvariantError
from .evaluation import distinctiveness_summary, evaluation_dict, inter_topic_distances, tightness
from .report import read_label_map, render_json, render_table, topic_report
from .sampler import TopicModel, run
from .synth import GroundTruth, align_columns, counts_to_events, match_topics, simulate

log = logging.getLogger("emrlda")


def atomic_write(path: Path, text: str) -> None:
    """Write via a temp file in the same directory so no partial file survives a failure."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def load_json(path, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DataError(f"{what} not found: {path}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: not a valid {what} ({exc})") from None


def load_model(path) -> TopicModel:
    d = load_json(path, "model file")
    try:
        return TopicModel.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"{path}: not a valid model file ({exc})") from None


def shared_options(f):
    f = click.option("--format", "fmt", type=click.Choice(["json", "table"]), default=None,
                     help="Output format (default from config, else table).")(f)
    f = click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None,
                     help="Output directory.")(f)
    f = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="RNG seed override.")(f)
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="JSON run configuration.")(f)
    return f


def _resolve(config_path, out, fmt) -> tuple[RunConfig, Path | None, str]:
    cfg = load_config(config_path)
    out_dir = out if out is not None else (cfg.output.dir if config_path is not None else None)
    return cfg, out_dir, fmt or cfg.output.format


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Topic models of bag-of-codes patient records."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@cli.command()
@shared_options
@click.option("--events", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Event log file.")
@click.option("--coverage", type=float, default=None, help="Vocabulary coverage fraction.")
@click.option("-k", "--topics", "K", type=int, default=None, help="Number of topics.")
@click.option("--burn-in", type=int, default=None)
@click.option("--samples", type=int, default=None, help="Number of saved samples.")
@click.option("--thin", type=int, default=None, help="Sweeps between saved samples.")
@click.option("--theta/--no-theta", default=None, help="Store patient-topic mixtures in the model file.")
@click.option("--chains", type=int, default=None, help="Independent chains, seeds seed..seed+n-1.")
@click.option("--check", is_flag=True, help="Verify count tables after every sweep.")
def fit(config_path, seed, out, fmt, events, coverage, K, burn_in, samples, thin, theta, chains, check):
    """Build the corpus from an event log and fit LDA by collapsed Gibbs sampling."""
    cfg, out_dir, fmt = _resolve(config_path, out, fmt)
    out_dir = out_dir or Path(".")
    events = events or cfg.events
    if events is None:
        raise ConfigError("no events file given (--events or config 'events')")
    hyper = cfg.hyperparameters(K=K, seed=seed, burn_in_sweeps=burn_in, n_saved_samples=samples,
                                thinning_interval=thin)
    coverage = coverage if coverage is not None else cfg.coverage
    chains = chains if chains is not None else cfg.output.chains
    include_theta = theta if theta is not None else cfg.output.include_theta
    if chains < 1:
        raise ConfigError("chains must be at least 1")

    if not Path(events).exists():
        raise DataError(f"events file not found: {events}")
    log_ = read_events(events)
    vocab = build_vocabulary(log_, coverage)
    corpus = build_matrix(log_, vocab)
    log.info("corpus: %d patients x %d codes, %d tokens (backend %s)",
             corpus.n_docs, corpus.n_codes, corpus.total_tokens, kernels.BACKEND)

    def fit_chain(c):
        h = replace(hyper, seed=(hyper.seed + c) % 2**64)
        trace = []
        model = run(corpus, h, lambda s, ll: trace.append((s, ll)), check_invariants=check)
        return model, trace

    if chains == 1:
        results = [fit_chain(0)]
    else:
        with ThreadPoolExecutor(max_workers=chains) as pool:
            results = list(pool.map(fit_chain, range(chains)))

    atomic_write(out_dir / "vocabulary.json", dump_json(vocab.to_dict()))
    atomic_write(out_dir / "corpus.json", dump_json(corpus.to_dict()))
    for c, (model, trace) in enumerate(results):
        suffix = "" if chains == 1 else f"_chain{c}"
        atomic_write(out_dir / f"trace{suffix}.csv",
                     "sweep_index,log_likelihood\n" + "".join(f"{s},{ll!r}\n" for s, ll in trace))
        atomic_write(out_dir / f"model{suffix}.json", model.to_json(include_theta))
    summary = {
        "D": corpus.n_docs, "V": corpus.n_codes, "K": hyper.K,
        "sweeps": hyper.total_sweeps, "samples_averaged": results[0][0].n_samples_averaged,
        "final_log_likelihood": [r[1][-1][1] for r in results],
        "out": str(out_dir),
    }
    if fmt == "json":
        click.echo(dump_json(summary), nl=False)
    else:
        click.echo(f"fit D={summary['D']} V={summary['V']} K={summary['K']} sweeps={summary['sweeps']} "
                   f"samples={summary['samples_averaged']} -> {out_dir}")


@cli.command()
@shared_options
@click.argument("model_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--labels", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="CSV with code,label header.")
@click.option("--top-n", type=int, default=None)
def report(config_path, seed, out, fmt, model_path, labels, top_n):
    """Print the most probable codes of every topic."""
    cfg, out_dir, fmt = _resolve(config_path, out, fmt)
    model = load_model(model_path)
    labels = labels or cfg.labels
    label_map = read_label_map(labels) if labels else None
    top_n = top_n if top_n is not None else cfg.eval.top_n
    if top_n < 1:
        raise ConfigError("top-n must be at least 1")
    rows = topic_report(model.phi, model.codes, label_map, top_n)
    text = dump_json(render_json(rows)) if fmt == "json" else render_table(rows)
    if out_dir is not None:
        atomic_write(out_dir / ("report.json" if fmt == "json" else "report.txt"), text)
    click.echo(text, nl=False)


@cli.command(name="eval")
@shared_options
@click.argument("model_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--threshold", type=float, default=None)
@click.option("--top-n", type=int, default=None)
@click.option("--truth", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Ground-truth bundle from 'synth'; adds a topic matching.")
def eval_(config_path, seed, out, fmt, model_path, threshold, top_n, truth):
    """Distinctiveness (pairwise JSD) and tightness of a fitted model."""
    cfg, out_dir, fmt = _resolve(config_path, out, fmt)
    model = load_model(model_path)
    threshold = threshold if threshold is not None else cfg.eval.threshold
    top_n = top_n if top_n is not None else cfg.eval.top_n
    if model.K < 2:
        raise DataError("no distinct pairs")
    if top_n > model.V:
        log.warning("top-n %d exceeds the %d codes; using %d", top_n, model.V, model.V)
        top_n = model.V
    try:
        result = evaluation_dict(model.phi, threshold, top_n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    matching = None
    if truth is not None:
        gt = GroundTruth.from_dict(load_json(truth, "ground-truth file"))
        matching = match_topics(model.phi, align_columns(gt.phi_star, gt.codes, model.codes))
        result["matching"] = matching.to_dict()
    if out_dir is not None:
        atomic_write(out_dir / "eval.json", dump_json(result))
    if fmt == "json":
        click.echo(dump_json(result), nl=False)
        return
    d = inter_topic_distances(model.phi)
    click.echo(distinctiveness_summary(d).line())
    click.echo(tightness(model.phi, threshold, top_n).to_table())
    if matching is not None:
        click.echo(f"matched mean_jsd={matching.mean_matched_jsd:.3f} max_jsd={matching.max_matched_jsd:.3f}")


@cli.command()
@shared_options
@click.option("-k", "--topics", "k", type=int, default=None)
@click.option("--codes", "v", type=int, default=None)
@click.option("--patients", "d", type=int, default=None)
def synth(config_path, seed, out, fmt, k, v, d):
    """Draw a synthetic event log with known topics."""
    cfg, out_dir, fmt = _resolve(config_path, out, fmt)
    out_dir = out_dir or Path(".")
    overrides = {key: val for key, val in {"k": k, "v": v, "d": d, "seed": seed}.items() if val is not None}
    try:
        gen = replace(cfg.synth, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    truth, counts, codes, patients = simulate(gen)
    buf = io.StringIO()
    write_events(counts_to_events(counts, codes, patients), buf)
    atomic_write(out_dir / "events.csv", buf.getvalue())
    atomic_write(out_dir / "ground_truth.json", dump_json(truth.to_dict()))
    summary = {"patients": gen.d, "codes": gen.v, "topics": gen.k, "tokens": int(counts.sum()), "out": str(out_dir)}
    if fmt == "json":
        click.echo(dump_json(summary), nl=False)
    else:
        click.echo(f"synth D={gen.d} V={gen.v} K*={gen.k} tokens={summary['tokens']} -> {out_dir}")


@cli.command()
@shared_options
@click.argument("path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--coverage", type=float, default=None)
def stats(config_path, seed, out, fmt, path, coverage):
    """Corpus summary from an event log or a corpus.json."""
    cfg, out_dir, fmt = _resolve(config_path, out, fmt)
    if path.suffix == ".json":
        try:
            corpus = PatientConditionsCorpus.from_dict(load_json(path, "corpus file"))
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}: not a valid corpus file ({exc})") from None
    else:
        if not path.exists():
            raise DataError(f"events file not found: {path}")
        events = read_events(path)
        corpus = build_matrix(events, build_vocabulary(events, coverage if coverage is not None else cfg.coverage))
    result = corpus_stats(corpus)
    if out_dir is not None:
        atomic_write(out_dir / "stats.json", dump_json(result))
    if fmt == "json":
        click.echo(dump_json(result), nl=False)
    else:
        for key, val in result.items():
            click.echo(f"{key:<14}{val}")


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="emrlda", standalone_mode=False)
        return rv if isinstance(rv, int) else 0
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except (DataError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except InvariantError as exc:
        click.echo(f"internal error: {exc}", err=True)
        return 3
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
