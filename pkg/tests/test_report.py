import numpy as np
import pytest

from galileo.report import contingency, matched_agreement, summary_rows, to_csv, to_text
from galileo.scaling import Timing, loglog_slope, time_anneal
from galileo.anneal import AnnealConfig

from conftest import two_blocks


def test_contingency_counts():
    t = contingency([0, 0, 1, 1, 1], ["a", "b", "b", "b", "a"])
    assert t.classes == ("a", "b")
    assert t.counts.tolist() == [[1, 1], [1, 2]]
    assert t.sizes.tolist() == [2, 3]
    assert not t.pure()
    rows = t.rows()
    assert rows[0] == ["cluster", "size", "a", "b"]
    assert rows[-1] == ["total", 5, 2, 3]


def test_contingency_without_labels():
    t = contingency([0, 2, 2], k=3)
    assert t.clusters.tolist() == [0, 2]
    assert t.rows()[0] == ["cluster", "size"]
    assert t.pure()


def test_single_cluster():
    t = contingency([0, 0, 0], ["x", "y", "x"])
    assert len(t.rows()) == 3
    assert t.rows()[1][1:] == t.rows()[-1][1:]


def test_matched_agreement():
    assert matched_agreement([1, 1, 0, 0], ["a", "a", "b", "b"]) == 1.0
    assert matched_agreement([0, 0, 0, 1], ["a", "a", "b", "b"]) == 0.75


def test_text_and_csv():
    rows = summary_rows("zoo", 9, 0.5, 1.25)
    assert to_csv(rows).splitlines() == ["dataset,k,category_utility,mean_density",
                                         "zoo,9,0.5,1.25"]
    lines = to_text(rows).splitlines()
    assert len({len(line) for line in lines}) == 1


def test_slope_of_exact_power_law():
    ts = [Timing(n, 1e-6 * n ** 1.1, (1.0,)) for n in (10, 1_000, 10_000, 100_000)]
    assert loglog_slope(ts) == pytest.approx(1.1)
    with pytest.raises(ValueError):
        loglog_slope(ts[:1])


def test_time_anneal_runs():
    t = time_anneal(two_blocks(), AnnealConfig(kmax=3), repeats=2)
    assert len(t.runs) == 2 and t.median > 0 and t.spread >= 0
