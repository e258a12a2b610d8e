import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmpkit import RankDeficiencyError
from cmpkit.analysis import (CavityRecord, gap_curve, quadratic_regression, read_tables, report,
                             summarize)

coef = st.floats(-10, 10)


def test_bundled_tables():
    records = read_tables()
    assert len(records) == 14
    assert [r.cavity for r in records].count("CAV01") == 6
    assert records[0].d_gap_um == 116 and records[6].d_gap_um is None


@settings(max_examples=100, deadline=None)
@given(coef, coef, coef)
def test_exact_parabola(a, b, c):
    x = np.linspace(-0.3, 1.7, 9)
    q = quadratic_regression(x, a * x * x + b * x + c)
    assert np.allclose([q.a, q.b, q.c], [a, b, c], atol=1e-10)
    if abs(a) + abs(b) > 1e-3:
        assert q.r2 == pytest.approx(1.0, abs=1e-12)


def test_constant_and_degenerate():
    q = quadratic_regression([0.1, 0.2, 0.5, 0.9], [3.0] * 4)
    assert (q.a, q.b, q.c) == pytest.approx((0.0, 0.0, 3.0), abs=1e-12)
    with pytest.raises(RankDeficiencyError):
        quadratic_regression([1.0, 1.0, 2.0, 2.0], [1, 2, 3, 4])


def test_reordering_invariance():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, 20)
    y = 2 * x * x - x + rng.normal(0, 0.05, 20)
    perm = rng.permutation(20)
    a, b = quadratic_regression(x, y), quadratic_regression(x[perm], y[perm])
    assert a.rss == pytest.approx(b.rss, rel=1e-10)
    assert (a.a, a.b, a.c) == pytest.approx((b.a, b.b, b.c), rel=1e-10)


def test_gap_curve():
    curve = gap_curve(np.linspace(0, 0.6, 7), 0.3)
    assert curve.shape == (7, 2)
    assert curve[0, 1] == pytest.approx(0.0, abs=1e-14)
    assert np.all(np.diff(curve[:, 1]) > 0)
    assert np.allclose(gap_curve([0.2, 0.4], 0.0)[:, 1], 0.0, atol=1e-14)


def test_summary_contents():
    s = summarize(read_tables())
    assert s["consistency"]["all_consistent"]
    assert s["gap"]["n_within_tolerance"] == 14
    assert s["gap"]["n_within_tight_tolerance"] >= 10
    assert s["regime_counts"]["USC"] == 14
    assert s["regression"]["delta_over_omega_vs_g_over_omega"]["a"] > 0


def test_report_files_parse(tmp_path):
    out = tmp_path / "r.json"
    summary = report(read_tables(), out=out, plots_dir=tmp_path / "plots")
    assert json.loads(out.read_text())["n_records"] == 14
    assert len(summary["plots"]) == 3
    for name in summary["plots"]:
        root = ET.parse(tmp_path / "plots" / name).getroot()
        assert root.tag.endswith("svg")


def test_report_is_deterministic(tmp_path):
    report(read_tables(), out=tmp_path / "a.json", plots_dir=tmp_path / "a")
    report(read_tables(), out=tmp_path / "b.json", plots_dir=tmp_path / "b")
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_write_failure_names_path(tmp_path):
    bad = tmp_path / "missing" / "r.json"
    with pytest.raises(OSError, match="missing"):
        report(read_tables(), out=bad)


def test_record_validation(tmp_path):
    with pytest.raises(ValueError):
        CavityRecord("X(a)", f_DM=5.0, f_BM=4.0, g=1.0, delta_m=1.0, f_gap=0.1)
    path = tmp_path / "t.csv"
    path.write_text("label,f_BM\nA,1\n")
    with pytest.raises(ValueError):
        read_tables(path)
