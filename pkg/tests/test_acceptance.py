"""Acceptance gate: one check per criterion, each at its stated tolerance and time budget."""

import time

import numpy as np

from cmpkit import (BranchData, DispersionModelParams, FitProblem, FmrParams,
                    SampleGeometry, demag_tensor, demag_tensor_points, dicke_full,
                    dsc_threshold_frequency, extract_branches, fit, hopfield, rwa, shifted_dicke,
                    symmetrize, synthesize, table_consistency, zero_field_gap)
from cmpkit.analysis import quadratic_regression, read_tables
from cmpkit.fmr import fmr_frequency_masked
from cmpkit.polariton import branch_arrays
from oracles import prism_tensor_oracle

ROW_E = dict(f_bm=4.46, g=2.03, delta_m=2.39, f_dm=1.38)


def test_c1_table_consistency(record_criterion):
    t0 = time.perf_counter()
    records = read_tables()
    worst = 0.0
    for rec in records:
        ratio, g2w = table_consistency(rec.g, rec.f_BM)
        worst = max(worst, abs(ratio - rec.g_over_w), abs(g2w - rec.g2_over_2piw))
    dt = time.perf_counter() - t0
    ok = len(records) == 14 and worst <= 0.01 + 1e-12 and dt < 1
    record_criterion(1, "table consistency", ok,
                     f"{len(records)} rows, max |residual| {worst:.4f} <= 0.01", dt)
    assert ok


def test_c2_zero_field_gap(record_criterion):
    t0 = time.perf_counter()
    records = read_tables()
    res = {r.label: zero_field_gap(r.model_params()) - r.f_gap for r in records}
    dt = time.perf_counter() - t0
    worst = max(abs(v) for v in res.values())
    tight = sum(abs(v) <= 0.03 for v in res.values())
    ok = worst <= 0.08 and tight >= 10 and dt < 1
    record_criterion(2, "zero-field gap", ok,
                     f"max |residual| {worst:.3f} GHz <= 0.08, {tight}/14 within 0.03", dt)
    assert ok
    spot = {"CAV02(a)": 0.243, "CAV01(f)": 1.216, "CAV03(a)": 0.009}
    for label, value in spot.items():
        rec = next(r for r in records if r.label == label)
        assert abs(zero_field_gap(rec.model_params()) - value) < 0.0015


def test_c3_dsc_thresholds(record_criterion):
    t0 = time.perf_counter()
    f1 = dsc_threshold_frequency(1.0)
    f079 = dsc_threshold_frequency(0.79)
    dt = time.perf_counter() - t0
    e1, e079 = abs(f1 / 1.72 - 1), abs(f079 / 1.07 - 1)
    ok = e1 <= 0.02 and e079 <= 0.02 and dt < 1
    record_criterion(3, "DSC thresholds", ok,
                     f"{f1:.4f} GHz ({100 * e1:.2f}%), {f079:.4f} GHz ({100 * e079:.2f}%)", dt)
    assert ok


def test_c4_model_limits(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240401)
    worst_h = worst_s = 0.0
    for _ in range(1000):
        w = rng.uniform(1.0, 15.0)
        m = rng.uniform(0.05, 20.0)
        g = rng.uniform(0.0, 0.5) * np.sqrt(w * m)  # stays inside the stable region
        base = DispersionModelParams(w, g)
        ref = np.array(dicke_full(base, m))
        h = np.array(hopfield(base.with_(model="hopfield", hopfield_prefactor=0.0), m))
        s = np.array(shifted_dicke(base.with_(magnon_shift=0.0), m))
        worst_h = max(worst_h, np.max(np.abs(h - ref) / np.abs(ref)))
        worst_s = max(worst_s, np.max(np.abs(s - ref) / np.abs(ref)))
    worst_r = 0.0
    for w in (2.0, 5.0, 10.0):
        for ratio in (1e-4, 1e-3, 5e-3, 1e-2):
            p = DispersionModelParams(w, ratio * w)
            for m in np.linspace(0.5 * w, 1.5 * w, 201):
                a = np.array(rwa(p, m))
                b = np.array(dicke_full(p, m))
                worst_r = max(worst_r, np.max(np.abs(a - b) / b))
    dt = time.perf_counter() - t0
    ok = worst_h <= 1e-12 and worst_s <= 1e-12 and worst_r <= 0.01 and dt < 5
    record_criterion(4, "model-limit equivalences", ok,
                     f"hopfield(d=0) {worst_h:.1e}, shifted(0) {worst_s:.1e}, "
                     f"rwa {100 * worst_r:.3f}%", dt)
    assert ok


def test_c5_demag_tensor(record_criterion):
    t0 = time.perf_counter()
    geom = SampleGeometry.reference_slab()
    rng = np.random.default_rng(7)
    a = np.array(geom.half_dims)
    pts = rng.uniform(-0.999, 0.999, size=(1000, 3)) * a
    traces = np.trace(demag_tensor_points(geom, pts), axis1=1, axis2=2)
    worst_trace = float(np.max(np.abs(traces - 1)))
    cube = np.array(demag_tensor(SampleGeometry((1e-3, 1e-3, 1e-3))).diag)
    worst_cube = float(np.max(np.abs(cube - 1 / 3)))
    worst_oracle = 0.0
    for p in rng.uniform(-0.9, 0.9, size=(10, 3)) * a:
        ref = prism_tensor_oracle(a, p)
        got = demag_tensor(geom, p).components
        scale = np.max(np.abs(ref))
        worst_oracle = max(worst_oracle, float(np.max(np.abs(got - ref)) / scale))
    dt = time.perf_counter() - t0
    ok = worst_trace <= 1e-9 and worst_cube <= 1e-12 and worst_oracle <= 1e-6 and dt < 30
    record_criterion(5, "demagnetizing tensor", ok,
                     f"trace {worst_trace:.1e}, cube {worst_cube:.1e}, "
                     f"oracle {worst_oracle:.1e}", dt)
    assert ok


def _row_e_branches(noise, seed, fmr):
    fields = np.linspace(0.02, 0.5, 50)
    p = DispersionModelParams(ROW_E["f_bm"], ROW_E["g"], ROW_E["delta_m"])
    lower, upper = branch_arrays(p, fmr_frequency_masked(fields, fmr))
    rng = np.random.default_rng(seed)
    f = np.concatenate([lower, upper, np.full(fields.size, ROW_E["f_dm"])])
    h = np.tile(fields, 3)
    labels = np.repeat(["lower", "upper", "dark"], fields.size)
    ok = np.isfinite(f)
    f = f * (1 + noise * rng.standard_normal(f.size))
    return BranchData(h[ok], f[ok], labels[ok])


def test_c6_fit_round_trip(record_criterion):
    t0 = time.perf_counter()
    fmr = FmrParams()
    errs = []
    for seed in range(100):
        result = fit(FitProblem(_row_e_branches(0.005, seed, fmr)))
        errs.append([abs(result.params[k] / ROW_E[k] - 1) for k in ("f_bm", "g", "delta_m")])
    p95 = np.percentile(errs, 95, axis=0)
    dt = time.perf_counter() - t0
    ok = bool(np.all(p95 <= 0.02)) and dt < 60
    record_criterion(6, "fit round-trip", ok,
                     "95th pct rel. error f_bm {:.4f}, g {:.4f}, delta_m {:.4f}".format(*p95), dt)
    assert ok


def test_c7_full_pipeline(record_criterion):
    t0 = time.perf_counter()
    fmr = FmrParams()
    p = DispersionModelParams(ROW_E["f_bm"], ROW_E["g"], ROW_E["delta_m"])
    spectrum = synthesize(p, fmr, ROW_E["f_dm"], {"cavity": 0.15, "magnon": 0.15, "dark": 0.1},
                      np.linspace(-0.4, 0.4, 201), np.linspace(0.5, 12.0, 401),
                      snr_db=40.0, seed=11)
    branches = extract_branches(spectrum, -20.0)
    result = fit(FitProblem(symmetrize(branches)))
    errs = [abs(result.params[k] / ROW_E[k] - 1) for k in ("f_bm", "g", "delta_m")]
    dt = time.perf_counter() - t0
    ok = spectrum.magnitude_db.shape == (201, 401) and max(errs) <= 0.03 and dt < 60
    record_criterion(7, "full pipeline", ok,
                     "rel. error f_bm {:.4f}, g {:.4f}, delta_m {:.4f}".format(*errs), dt)
    assert ok


def test_c8_regression(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        coef = rng.uniform(-5, 5, 3)
        x = np.sort(rng.uniform(0, 1, 14))
        q = quadratic_regression(x, coef[0] * x ** 2 + coef[1] * x + coef[2])
        worst = max(worst, float(np.max(np.abs(np.array([q.a, q.b, q.c]) - coef))))
    records = read_tables()
    x = np.array([r.g_over_omega for r in records])
    y = np.array([r.delta_m / r.f_BM for r in records])
    table_fit = quadratic_regression(x, y)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and table_fit.a > 0 and dt < 1
    record_criterion(8, "regression", ok,
                     f"synthetic coeff error {worst:.1e}, table leading coeff {table_fit.a:.3f}", dt)
    assert ok
