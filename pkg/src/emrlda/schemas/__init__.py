"""JSON Schemas for every file and JSON stream the CLI emits."""
import json
from importlib import resources

NAMES = ("config", "corpus", "eval", "fit_summary", "ground_truth", "model", "report", "stats",
         "synth_summary", "vocabulary")


def load(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"unknown schema {name!r}")
    return json.loads(resources.files(__name__).joinpath(f"{name}.schema.json").read_text(encoding="utf-8"))
