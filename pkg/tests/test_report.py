import re

import numpy as np
import pytest

from emrlda.errors import DataError
from emrlda.report import format_probability, read_label_map, render_json, render_table, topic_report

from .tables import TOPIC_A, fixture_phi_and_labels, write_label_map


@pytest.mark.parametrize("p, s", [(0.369, ".369"), (0.0004, ".000"), (0.9996, "1.000"), (1.0, "1.000"),
                                  (0.0291, ".029")])
def test_format_probability(p, s):
    assert format_probability(p) == s


def test_topic_a_rows():
    phi, codes, labels = fixture_phi_and_labels()
    rows = topic_report(phi, codes, labels)
    first = rows[0].entries[0]
    assert first[1] == "Type 2 diabetes mellitus"
    assert format_probability(first[2]) == ".369"
    assert [format_probability(p) for _, _, p in rows[0].entries] == [f"{p:.3f}"[1:] for _, p in TOPIC_A]
    assert format_probability(rows[0].cumulative_probability) == ".989"
    assert format_probability(rows[1].cumulative_probability) == ".998"


def test_table_layout():
    phi, codes, labels = fixture_phi_and_labels()
    text = render_table(topic_report(phi, codes, labels))
    lines = text.splitlines()
    assert lines[0].split()[:3] == ["Topic", "0", "Prob"]
    assert re.match(r"Type 2 diabetes mellitus +\.369 ", lines[1])
    assert lines[-1].startswith("CUMULATIVE PROBABILITY")
    assert lines[-1].split()[2:] == [".989", ".998"]
    assert len(lines) == 12


def test_one_hot_and_code_fallback():
    phi = np.array([[0.0, 1.0, 0.0]])
    rows = topic_report(phi, ["a", "b", "c"], None)
    assert rows[0].entries == (("b", None, 1.0),)
    text = render_table(rows)
    assert "b" in text.splitlines()[1] and "1.000" in text.splitlines()[1]
    assert text.splitlines()[-1].split()[-1] == "1.000"


def test_ties_follow_vocabulary_index():
    rows = topic_report(np.array([[0.25, 0.25, 0.25, 0.25]]), list("wxyz"), top_n=2)
    assert [c for c, _, _ in rows[0].entries] == ["w", "x"]


def test_bands_and_json():
    phi = np.tile(np.array([[0.5, 0.5]]), (5, 1))
    rows = topic_report(phi, ["a", "b"])
    text = render_table(rows, per_band=3)
    assert text.count("CUMULATIVE PROBABILITY") == 2
    d = render_json(rows)
    assert d["topics"][4]["entries"][0] == {"code": "a", "label": None, "probability": 0.5}


def test_label_map(tmp_path):
    path = tmp_path / "labels.csv"
    write_label_map(path, {"A": "Alpha, with comma"})
    assert read_label_map(path) == {"A": "Alpha, with comma"}
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\nA,B\n")
    with pytest.raises(DataError):
        read_label_map(bad)
