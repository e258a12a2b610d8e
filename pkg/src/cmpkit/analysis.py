"""Cross-cavity analyses over the fitted-parameter tables.

Covers the table-consistency check, the zero-field gap, the quadratic
scaling of the magnon shift with g/omega, and the JSON + SVG report.
"""

import csv
import json
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import svg
from .coupling import classify_regime, table_consistency
from .errors import RankDeficiencyError
from .polariton import DispersionModelParams, Model, dicke_arrays, zero_field_gap

TABLE_COLUMNS = ("label", "d_um", "f_DM", "f_BM", "g_2pi", "g_over_w", "g2_over_2piw",
                 "delta_m", "f_gap")

CONSISTENCY_TOL = 0.01  # two-decimal table rounding
GAP_TOL = 0.08
GAP_TIGHT_TOL = 0.03


@dataclass(frozen=True)
class CavityRecord:
    label: str
    f_DM: float
    f_BM: float
    g: float
    delta_m: float
    f_gap: float
    d_gap_um: float = None
    g_over_w: float = None  # as printed
    g2_over_2piw: float = None  # as printed

    def __post_init__(self):
        for name in ("f_DM", "f_BM", "g", "delta_m", "f_gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{self.label}: {name} must be positive")
        if not self.f_DM < self.f_BM:
            raise ValueError(f"{self.label}: dark mode must lie below the bright mode")

    @property
    def cavity(self):
        return self.label.split("(")[0]

    @property
    def g_over_omega(self):
        return self.g / self.f_BM

    def model_params(self):
        return DispersionModelParams(self.f_BM, self.g, self.delta_m, model=Model.SHIFTED_DICKE)


def _opt_float(text):
    text = (text or "").strip()
    return float(text) if text else None


def read_tables(path=None):
    """Records from a tables CSV; the bundled cavity tables by default."""
    if path is None:
        text = resources.files("cmpkit.data").joinpath("cavity_tables.csv").read_text()
    else:
        text = Path(path).read_text()
    rows = list(csv.DictReader(text.splitlines()))
    missing = set(TABLE_COLUMNS) - set(rows[0] if rows else ())
    if missing:
        raise ValueError(f"tables file lacks columns {sorted(missing)}")
    return [
        CavityRecord(
            label=r["label"].strip(),
            d_gap_um=_opt_float(r["d_um"]),
            f_DM=float(r["f_DM"]),
            f_BM=float(r["f_BM"]),
            g=float(r["g_2pi"]),
            g_over_w=_opt_float(r["g_over_w"]),
            g2_over_2piw=_opt_float(r["g2_over_2piw"]),
            delta_m=float(r["delta_m"]),
            f_gap=float(r["f_gap"]),
        )
        for r in rows
    ]


@dataclass(frozen=True)
class QuadraticFit:
    a: float
    b: float
    c: float
    r2: float
    rss: float

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return (self.a * x + self.b) * x + self.c


def quadratic_regression(x, y):
    """Least-squares parabola y = a x^2 + b x + c with its R^2."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValueError("x and y must have equal length")
    if np.unique(x).size < 3:
        raise RankDeficiencyError("quadratic regression needs at least 3 distinct x values")
    # centre and scale x so the Vandermonde matrix stays well conditioned
    mu = x.mean()
    sc = np.abs(x - mu).max()
    t = (x - mu) / sc
    design = np.column_stack([t * t, t, np.ones_like(t)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise RankDeficiencyError("degenerate regression design")
    at, bt, ct = coef
    a = at / sc ** 2
    b = bt / sc - 2 * at * mu / sc ** 2
    c = ct - bt * mu / sc + at * mu * mu / sc ** 2
    resid = y - design @ coef
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else (1.0 if rss <= 1e-24 else 0.0)
    return QuadraticFit(float(a), float(b), float(c), float(r2), rss)


def gap_curve(g_over_omega, delta_m_over_omega, cavity_freq=1.0, zero_field_magnon=0.0):
    """(g/omega, gap/omega) pairs for a g/omega sweep at fixed delta_m/omega."""
    r = np.asarray(g_over_omega, dtype=np.float64)
    w = float(cavity_freq)
    _, upper = dicke_arrays(w, zero_field_magnon + delta_m_over_omega * w, r * w)
    return np.column_stack([r, (upper - w) / w])


def consistency_rows(records):
    rows = []
    for rec in records:
        ratio, g2w = table_consistency(rec.g, rec.f_BM)
        gap = zero_field_gap(rec.model_params())
        row = {
            "label": rec.label,
            "g_over_omega": ratio,
            "g2_over_2pi_omega": g2w,
            "regime": classify_regime(ratio).value,
            "gap_model": gap,
            "gap_printed": rec.f_gap,
            "gap_residual": gap - rec.f_gap,
        }
        if rec.g_over_w is not None:
            row["g_over_omega_printed"] = rec.g_over_w
            row["g_over_omega_residual"] = ratio - rec.g_over_w
        if rec.g2_over_2piw is not None:
            row["g2_over_2pi_omega_printed"] = rec.g2_over_2piw
            row["g2_over_2pi_omega_residual"] = g2w - rec.g2_over_2piw
        row["consistent"] = all(abs(row.get(k, 0.0)) <= CONSISTENCY_TOL + 1e-12
                                for k in ("g_over_omega_residual", "g2_over_2pi_omega_residual"))
        row["gap_within_tol"] = abs(row["gap_residual"]) <= GAP_TOL
        rows.append(row)
    return rows


def _regression_dict(fit):
    return {"a": fit.a, "b": fit.b, "c": fit.c, "r2": fit.r2}


def summarize(records, fits=()):
    if not records:
        raise ValueError("report needs at least one record")
    rows = consistency_rows(records)
    x = np.array([r.g_over_omega for r in records])
    dm_w = np.array([r.delta_m / r.f_BM for r in records])
    g2w = np.array([r.g ** 2 / r.f_BM for r in records])
    dm = np.array([r.delta_m for r in records])
    gap_res = np.array([row["gap_residual"] for row in rows])
    summary = {
        "n_records": len(records),
        "rows": rows,
        "consistency": {
            "tolerance": CONSISTENCY_TOL,
            "all_consistent": all(row["consistent"] for row in rows),
            "max_abs_residual": max(
                (abs(row.get(k, 0.0)) for row in rows
                 for k in ("g_over_omega_residual", "g2_over_2pi_omega_residual")),
                default=0.0),
        },
        "gap": {
            "tolerance": GAP_TOL,
            "tight_tolerance": GAP_TIGHT_TOL,
            "max_abs_residual": float(np.max(np.abs(gap_res))),
            "n_within_tolerance": int(np.sum(np.abs(gap_res) <= GAP_TOL)),
            "n_within_tight_tolerance": int(np.sum(np.abs(gap_res) <= GAP_TIGHT_TOL)),
        },
        "regime_counts": {k: sum(row["regime"] == k for row in rows) for k in ("SC", "USC", "DSC")},
    }
    if np.unique(x).size >= 3:
        summary["regression"] = {
            "delta_over_omega_vs_g_over_omega": _regression_dict(quadratic_regression(x, dm_w)),
            "delta_vs_g2_over_omega": _regression_dict(quadratic_regression(g2w, dm)),
        }
    fits = list(fits)
    if fits:
        summary["fits"] = [f.to_dict() if hasattr(f, "to_dict") else dict(f) for f in fits]
    return summary


def write_plots(records, plots_dir):
    plots_dir = Path(plots_dir)
    plots_dir.mkdir(parents=True, exist_ok=True)
    groups = {}
    for rec in records:
        groups.setdefault(rec.cavity, []).append(rec)
    written = []

    scatter = [(name, [r.g_over_omega for r in recs], [r.delta_m / r.f_BM for r in recs])
               for name, recs in groups.items()]
    curves = []
    x = np.array([r.g_over_omega for r in records])
    if np.unique(x).size >= 3:
        q = quadratic_regression(x, [r.delta_m / r.f_BM for r in records])
        xs = np.linspace(0.0, x.max() * 1.05, 60)
        curves.append(("quadratic fit", xs, q(xs)))
    path = plots_dir / "delta_over_omega_vs_g_over_omega.svg"
    svg.plot(path, "Magnon shift vs coupling rate", "g/omega", "Delta_m/omega", scatter, curves)
    written.append(path)

    scatter = [(name, [r.g ** 2 / r.f_BM for r in recs], [r.delta_m for r in recs])
               for name, recs in groups.items()]
    path = plots_dir / "delta_vs_g2_over_omega.svg"
    svg.plot(path, "Magnon shift vs g^2/omega", "g^2/(2 pi omega) [GHz]", "Delta_m/2pi [GHz]",
             scatter)
    written.append(path)

    scatter = [(name, [r.g_over_omega for r in recs], [r.f_gap / r.f_BM for r in recs])
               for name, recs in groups.items()]
    xs = np.linspace(0.0, max(0.65, x.max() * 1.05), 80)
    curves = []
    for name, recs in groups.items():
        dmw = float(np.mean([r.delta_m / r.f_BM for r in recs]))
        curve = gap_curve(xs, dmw)
        curves.append((f"{name} model, Delta_m/omega={dmw:.3f}", curve[:, 0], curve[:, 1]))
    path = plots_dir / "gap_curves.svg"
    svg.plot(path, "Zero-field gap", "g/omega", "Delta_g/omega", scatter, curves)
    written.append(path)
    return written


def report(records, fits=(), out=None, plots_dir=None):
    """Build the summary dict; optionally write it as JSON and emit SVG plots."""
    summary = summarize(records, fits)
    if plots_dir is not None:
        summary["plots"] = [str(p.name) for p in write_plots(records, plots_dir)]
    if out is not None:
        out = Path(out)
        try:
            out.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write report to {out}: {exc}") from exc
    return summary
