import numpy as np
import pytest

from miregion.checks import (
    bounds_report,
    chain_frame,
    data_processing_check,
    erasure_matrix,
    processed_source,
    quantity_superadditivity,
    random_corpus,
    superadditivity_check,
)
from miregion.probability import mutual_information
from miregion.quantities import QuantityResult


def test_bounds_report_on_short_circuit_sources(p_eq, p_ind, fast_cfg):
    eq = bounds_report(p_eq, fast_cfg)
    assert eq["ordered"]
    assert eq["chain"]["g_nni"] == 0.0
    ind = bounds_report(p_ind, fast_cfg)
    assert ind["ordered"]
    assert ind["chain"]["g_ppi"] == pytest.approx(1.0)
    assert ind["methods"]["g_ppi"] == "construction"


def test_bounds_report_flags_a_broken_chain(p_ind):
    results = {
        name: QuantityResult(name=name, value=value, method="optimizer")
        for name, value in (("g_ppi", 0.5), ("g_pni", 0.2), ("g_nni", 0.3))
    }
    rep = bounds_report(p_ind, results=results)
    assert not rep["ordered"]
    assert "g_ppi" in rep["optimizer_failure"]


def test_chain_frame(p_eq, p_ind, fast_cfg):
    df = chain_frame([p_eq, p_ind], fast_cfg)
    assert len(df) == 2
    assert df["ordered"].all()
    assert {"g_ppi", "g_pni", "g_nni", "min_conditional_entropy"} <= set(df.columns)


def test_random_corpus_is_reproducible():
    a, b = random_corpus(3, seed=7), random_corpus(3, seed=7)
    for p, q in zip(a, b):
        np.testing.assert_array_equal(p.p, q.p)
    assert a[0].p.shape == (3, 3)


def test_superadditivity_on_equal_bits(p_eq, fast_cfg):
    df, summary = superadditivity_check(p_eq, p_eq, fast_cfg, trials=3)
    assert len(df) == 3
    assert summary["inside"] == 3
    assert summary["max_witness_gap"] <= 1e-10


def test_quantity_superadditivity_on_independent_bits(p_ind, fast_cfg):
    out = quantity_superadditivity(p_ind, p_ind, "g_ppi", fast_cfg)
    assert out["parts"] == [pytest.approx(1.0), pytest.approx(1.0)]
    assert out["excess"] == pytest.approx(0.0, abs=1e-9)


def test_erasure_matrix():
    m = erasure_matrix(2, 0.25)
    assert m.shape == (2, 3)
    np.testing.assert_allclose(m.sum(axis=1), 1.0)
    assert m[0, 2] == 0.25


def test_processing_lowers_mutual_information(dsbs):
    p2 = processed_source(dsbs, erasure_matrix(2, 0.2), erasure_matrix(2, 0.3))
    assert p2.p.shape == (3, 3)
    assert mutual_information(p2) < mutual_information(dsbs)


def test_processed_source_rejects_bad_channels(dsbs):
    with pytest.raises(ValueError):
        processed_source(dsbs, np.array([[0.5, 0.6], [0.5, 0.5]]), np.eye(2))
    with pytest.raises(ValueError):
        processed_source(dsbs, np.eye(3), np.eye(2))


def test_data_processing_holds_on_erasures(dsbs, p_l):
    for p in (dsbs, p_l):
        df, summary = data_processing_check(p, erasure_matrix(2, 0.2), erasure_matrix(2, 0.3), trials=20)
        assert len(df) == 20
        assert summary["holds"], summary["min_slack"]


def test_identity_processing_has_zero_slack(p_l):
    _, summary = data_processing_check(p_l, np.eye(2), np.eye(2), trials=5)
    assert all(abs(v) <= 1e-12 for v in summary["min_slack"].values())


@pytest.mark.slow
def test_chain_holds_on_random_corpus():
    df = chain_frame(random_corpus(10, seed=11))
    assert df["ordered"].all()
