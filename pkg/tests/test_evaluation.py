import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from compnet.evaluation import (UndefinedCorrelation, average_ranks, correlation_report,
                                export_embedding_input, export_plot_series,
                                importance_by_timestep, log_betainc, spearman)
from compnet.ingest import GroundTruthTable
from compnet.labels import assign_classes

from oracles import ranks_average, spearman_p_quadrature


def test_spearman_hand_cases():
    x = np.arange(1, 11)
    assert spearman(x, x).rho == 1 and spearman(x, x).p_value == 0
    assert spearman(x, x[::-1]).rho == -1
    r = spearman([1, 2, 3, 4, 5], [1, 3, 2, 5, 4])
    assert r.rho == pytest.approx(0.8, abs=1e-15)
    assert r.p_value == pytest.approx(0.104, abs=5e-4)
    assert r.p_value == pytest.approx(spearman_p_quadrature(0.8, 5), rel=1e-6)


@pytest.mark.parametrize("n", [10, 100, 863])
def test_p_value_matches_t_quadrature(n):
    rng = np.random.default_rng(n)
    for strength in (0.0, 0.2, 0.5):
        x = rng.random(n)
        y = strength * x + rng.random(n)
        r = spearman(x, y)
        assert r.p_value == pytest.approx(spearman_p_quadrature(r.rho, n), rel=1e-6)


def test_log10_p_stays_finite_when_p_underflows():
    n = 863
    x = np.arange(n, dtype=float)
    y = x + np.random.default_rng(0).normal(0, 3, n)
    r = spearman(x, y)
    assert r.p_value == 0.0 and math.isfinite(r.log10_p) and r.log10_p < -300


def test_log_betainc_against_closed_forms():
    # I_x(1, 1) = x and I_x(a, 1) = x^a
    assert math.exp(log_betainc(1, 1, 0.3)) == pytest.approx(0.3)
    assert math.exp(log_betainc(2.5, 1, 0.6)) == pytest.approx(0.6 ** 2.5)
    assert log_betainc(2, 3, 0.0) == -math.inf and log_betainc(2, 3, 1.0) == 0.0


@given(st.lists(st.integers(0, 6), min_size=1, max_size=40))
def test_average_ranks_match_oracle(xs):
    assert average_ranks(xs).tolist() == ranks_average(xs)


def test_spearman_errors():
    with pytest.raises(UndefinedCorrelation):
        spearman([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        spearman([1, 2], [1, 2])


def _truth(values):
    return GroundTruthTable(tuple((f"a{i}", float(v)) for i, v in enumerate(values)))


def test_correlation_report_order_and_identity():
    rng = np.random.default_rng(1)
    truth = rng.random(50)
    feats = pd.DataFrame({"same": truth, "noisy": truth + rng.random(50),
                          "flat": np.ones(50), "anti": -truth},
                         index=[f"a{i}" for i in range(50)])
    rep = correlation_report(feats, _truth(truth))
    assert rep.ordering() == ["same", "noisy", "anti"]
    assert rep.rows[0].rho == 1.0
    assert rep.rows[-1].measure == "flat" and rep.rows[-1].note == "zero variance"
    assert "undefined" in rep.to_table()


def test_correlation_report_sums_long_form():
    long = pd.DataFrame({"actor": ["a0", "a0", "a1", "a2"], "competition": "c",
                         "round": [1, 2, 1, 1], "con1": [1, 5, 2, 3]})
    rep = correlation_report(long, _truth([3, 1, 2]), ["con1"])
    assert rep.rows[0].rho == 1.0


def test_importance_by_timestep_examples():
    imp = {f"{m}_t{r}": 0.0 for m in ("con1", "closeness") for r in (38, 39, 40)}
    imp["con1_t39"] = 1.0
    ts = importance_by_timestep(imp)
    assert ts.per_round.loc[39, "con1"] == 1.0
    assert ts.per_round.to_numpy().sum() == 1.0

    flat = importance_by_timestep({f"con1_t{r}": 0.25 for r in range(1, 5)})
    assert flat.per_round["con1"].tolist() == [0.25] * 4

    two = {f"con1_t{r}": 0.75 / 3 for r in (1, 2, 3)} | {f"out_degree_t{r}": 0.25 / 3 for r in (1, 2, 3)}
    means = importance_by_timestep(two).per_measure
    assert means["con1"] * 3 == pytest.approx(0.75) and means["out_degree"] * 3 == pytest.approx(0.25)
    with pytest.raises(ValueError):
        importance_by_timestep({"bogus": 1.0})


def test_export_plot_series():
    rng = np.random.default_rng(0)
    n = 861
    feats = pd.DataFrame({"con1": rng.random(n), "closeness": rng.random(n),
                          "pagerank_rev": rng.random(n), "flat": np.full(n, 2.0)},
                         index=[f"a{i}" for i in range(n)])
    out = export_plot_series(feats, "con1", window=1)
    assert out.shape == (n, 5) and out["rank"].tolist() == list(range(1, n + 1))
    assert out["con1"].iloc[0] == 1.0
    assert not out["flat"].any()
    smooth = export_plot_series(feats, "con1", _truth(rng.random(n)), window=50)
    assert "truth" in smooth and smooth["con1"].iloc[0] == 1.0
    assert smooth["con1"].iloc[10] > 0.95


def test_export_embedding_input():
    rng = np.random.default_rng(3)
    n = 493
    actors = [f"a{i}" for i in range(n)]
    wide = pd.DataFrame(rng.random((n, 4)) * 10, index=pd.Index(actors, name="actor"),
                        columns=["con1_t1", "con1_t2", "closeness_t1", "closeness_t2"])
    labels = assign_classes(_truth(rng.permutation(n)))
    out = export_embedding_input(wide, labels)
    assert len(out) == n
    assert out["label"].value_counts().to_dict() == {"Middle": 393, "Top": 50, "Bottom": 50}
    feats = out.drop(columns=["actor", "label"]).to_numpy()
    assert feats.min() >= 0 and feats.max() <= 1
    fewer = export_embedding_input(wide, {k: v for k, v in labels.as_dict().items() if k != "a7"})
    assert len(fewer) == n - 1 and "a7" not in set(fewer["actor"])
    pd.testing.assert_frame_equal(fewer, out[out["actor"] != "a7"].reset_index(drop=True))
