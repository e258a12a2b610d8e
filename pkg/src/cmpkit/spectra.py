"""Synthetic |S21| maps and polariton branch extraction.

Spectra are sums of unit-peak Lorentzians placed exactly on the model
branches, so the peak positions carry the physics and the amplitudes are
cosmetic. Extraction finds per-column maxima, refines them to sub-bin
precision and labels them dark / lower / upper.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import peak_prominences

from . import kernels
from .fmr import fmr_frequency_masked
from .polariton import Model, branch_arrays

log = logging.getLogger(__name__)

LABELS = ("lower", "upper", "dark")


@dataclass
class Spectrum2D:
    """|S21| in dB on a (field, frequency) grid. Fields in tesla, frequencies in GHz."""

    field_values: np.ndarray
    freq_values: np.ndarray
    magnitude_db: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.field_values = np.asarray(self.field_values, dtype=np.float64)
        self.freq_values = np.asarray(self.freq_values, dtype=np.float64)
        self.magnitude_db = np.asarray(self.magnitude_db, dtype=np.float64)
        for name in ("field_values", "freq_values"):
            axis = getattr(self, name)
            if axis.ndim != 1 or np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
        if self.magnitude_db.shape != (self.field_values.size, self.freq_values.size):
            raise ValueError("magnitude_db shape does not match the axes")
        if not np.all(np.isfinite(self.magnitude_db)):
            raise ValueError("magnitude_db must be finite")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["field_mT"] + [f"{f:.9g}" for f in self.freq_values])
            for h, row in zip(self.field_values, self.magnitude_db):
                writer.writerow([f"{1e3 * h:.9g}"] + [f"{v:.6f}" for v in row])

    @classmethod
    def from_csv(cls, path):
        """Read the header-of-frequencies layout; rows are sorted by field."""
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        freqs = np.array([float(v) for v in rows[0][1:]])
        body = np.array([[float(v) for v in r] for r in rows[1:]])
        fields = body[:, 0] * 1e-3
        order = np.argsort(fields, kind="stable")
        return cls(fields[order], freqs, body[order, 1:])


@dataclass
class BranchData:
    """Labelled branch points: field (T), frequency (GHz), label."""

    field: np.ndarray
    freq: np.ndarray
    label: np.ndarray
    metadata: dict = None

    def __post_init__(self):
        self.field = np.asarray(self.field, dtype=np.float64).ravel()
        self.freq = np.asarray(self.freq, dtype=np.float64).ravel()
        self.label = np.asarray(self.label, dtype=object).ravel()
        if not (self.field.size == self.freq.size == self.label.size):
            raise ValueError("field, freq and label must have equal length")
        bad = set(self.label.tolist()) - set(LABELS)
        if bad:
            raise ValueError(f"unknown branch labels {sorted(bad)}")
        if self.metadata is None:
            self.metadata = {}

    def __len__(self):
        return self.field.size

    def select(self, label):
        mask = self.label == label
        return self.field[mask], self.freq[mask]

    def subset(self, mask):
        return BranchData(self.field[mask], self.freq[mask], self.label[mask], dict(self.metadata))

    @classmethod
    def concat(cls, parts):
        parts = list(parts)
        return cls(np.concatenate([p.field for p in parts]),
                   np.concatenate([p.freq for p in parts]),
                   np.concatenate([p.label for p in parts]))

    def to_csv(self, path):
        """Write to a path, or to an open text stream."""
        if hasattr(path, "write"):
            self._write_rows(path)
            return
        with open(path, "w", newline="") as fh:
            self._write_rows(fh)

    def _write_rows(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["field_mT", "freq_GHz", "label"])
        for h, f, lab in zip(self.field, self.freq, self.label):
            writer.writerow([f"{1e3 * h:.9g}", f"{f:.9g}", lab])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
        return cls([float(r["field_mT"]) * 1e-3 for r in rows],
                   [float(r["freq_GHz"]) for r in rows],
                   [r["label"].strip() for r in rows])


def mixing_weights(cavity, magnon_eff, g):
    """Photonic fractions (lower, upper) from the two-mode mixing angle."""
    theta = 0.5 * np.arctan2(2.0 * g, cavity - np.asarray(magnon_eff, dtype=np.float64))
    return np.sin(theta) ** 2, np.cos(theta) ** 2


def synthesize(model, fmr, dm_freq, linewidths, fields, freqs, *, snr_db=None,
               noise_floor_db=-80.0, dark_weight=0.5, weight_floor=0.02, seed=None):
    """Synthetic |S21| (dB) over ``fields`` (T) x ``freqs`` (GHz).

    ``linewidths`` maps ``cavity``, ``magnon`` and ``dark`` to FWHM in GHz;
    a polariton's width interpolates between cavity and magnon by its
    photonic fraction. ``snr_db`` adds Gaussian noise of that level below a
    unit peak to the linear magnitude. Fields where the sample is unsaturated
    carry no magnon line and are listed in ``metadata["masked_fields"]``.
    """
    fields = np.asarray(fields, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    kc, km, kd = (float(linewidths[k]) for k in ("cavity", "magnon", "dark"))
    if min(kc, km, kd) <= 0:
        raise ValueError("linewidths must be positive")

    magnon = fmr_frequency_masked(fields, fmr)
    masked = np.isnan(magnon)
    shift = model.magnon_shift if model.model is Model.SHIFTED_DICKE else 0.0
    with np.errstate(invalid="ignore"):
        lower, upper = branch_arrays(model, np.where(masked, 0.0, magnon))
        w_lo, w_up = mixing_weights(model.cavity_freq, magnon + shift, model.coupling)
    lower = np.where(masked, np.nan, lower)
    upper = np.where(masked, model.cavity_freq, upper)
    w_lo = np.where(masked, 0.0, np.maximum(w_lo, weight_floor))
    w_up = np.where(masked, 1.0, np.maximum(w_up, weight_floor))

    n = fields.size
    centers = np.column_stack([np.full(n, float(dm_freq)), lower, upper])
    weights = np.column_stack([np.full(n, dark_weight), w_lo, w_up])
    widths = np.column_stack([np.full(n, kd),
                              w_lo * kc + (1 - w_lo) * km,
                              w_up * kc + (1 - w_up) * km])
    mag = kernels.lorentzian_grid(centers, widths, weights, freqs)
    if snr_db is not None:
        rng = np.random.default_rng(seed)
        mag = np.abs(mag + rng.normal(0.0, 10 ** (-snr_db / 20), mag.shape))
    db = 20 * np.log10(mag + 10 ** (noise_floor_db / 20))
    meta = {"masked_fields": fields[masked].tolist(), "n_masked": int(masked.sum())}
    return Spectrum2D(fields, freqs, db, meta)


def _prominent(values, rows, cols, min_prominence):
    """Mask of peaks whose topographic prominence reaches ``min_prominence``."""
    keep = np.ones(rows.size, dtype=bool)
    for r in np.unique(rows):
        sel = np.nonzero(rows == r)[0]
        prom = peak_prominences(values[r], cols[sel])[0]
        keep[sel] = prom >= min_prominence
    return keep


def _merge_close(rows, pos, height, min_sep):
    """Within a column keep only the tallest of peaks closer than ``min_sep``."""
    keep = np.ones(rows.size, dtype=bool)
    order = np.lexsort((pos, rows))
    rows, pos, height = rows[order], pos[order], height[order]
    for idx in range(1, rows.size):
        prev = idx - 1
        while prev >= 0 and not keep[prev]:
            prev -= 1
        if prev >= 0 and rows[prev] == rows[idx] and pos[idx] - pos[prev] < min_sep:
            if height[idx] > height[prev]:
                keep[prev] = False
            else:
                keep[idx] = False
    return rows[keep], pos[keep], height[keep]


def _find_dark(rows, pos, n_cols, tol):
    """Most persistent constant-frequency line, or None."""
    if pos.size == 0:
        return None
    best_count, best = 0, None
    for f in np.unique(np.round(pos / tol)) * tol:
        near = np.abs(pos - f) <= tol
        count = np.unique(rows[near]).size
        if count > best_count:
            best_count, best = count, float(np.median(pos[near]))
    if best_count < 0.5 * n_cols:
        return None
    return best


def extract_branches(spectrum, threshold_db=-20.0, *, absolute=False, min_prominence_db=3.0,
                     dark_freq=None, dark_tol=None, jump_limit=None, min_separation=None):
    """Label per-column spectral maxima as dark, lower and upper branch points.

    ``threshold_db`` is relative to the spectrum maximum, so a constant dB
    offset leaves the result unchanged; ``absolute`` makes it a fixed level.
    Maxima with less than ``min_prominence_db`` prominence (noise ripple on
    a line flank) are dropped.
    The dark line is the most persistent constant frequency (or
    ``dark_freq``). Remaining peaks are ordered when a column shows two,
    and assigned to the nearest tracked branch within ``jump_limit`` when
    it shows one.
    """
    freqs = spectrum.freq_values
    if freqs.size < 3:
        raise ValueError("need at least 3 frequency samples per column")
    step = float(np.median(np.diff(freqs)))
    dark_tol = dark_tol or 1.5 * step
    jump_limit = jump_limit or 20 * step
    min_separation = min_separation or 2.5 * step

    values = spectrum.magnitude_db
    thr = threshold_db if absolute else float(values.max()) + threshold_db
    rows, cols, pos, height = (np.asarray(v) for v in kernels.column_peaks(values, freqs, thr))
    keep = _prominent(values, rows, cols, min_prominence_db)
    rows, pos, height = _merge_close(rows[keep], pos[keep], height[keep], min_separation)

    n_cols = spectrum.field_values.size
    with_peaks = np.unique(rows).size
    if dark_freq is None:
        dark_freq = _find_dark(rows, pos, with_peaks, dark_tol)

    per_col = {c: [] for c in range(n_cols)}
    for r, p, h in zip(rows.tolist(), pos.tolist(), height.tolist()):
        per_col[r].append((p, h))

    labels = {}  # (col, pos) -> label
    polar = {}
    for c, peaks in per_col.items():
        rest = list(peaks)
        if dark_freq is not None and rest:
            dist = [abs(p - dark_freq) for p, _ in rest]
            k = int(np.argmin(dist))
            if dist[k] <= dark_tol:
                labels[(c, rest[k][0])] = "dark"
                rest.pop(k)
        if len(rest) > 2:
            rest = sorted(rest, key=lambda ph: -ph[1])[:2]
        polar[c] = sorted(p for p, _ in rest)

    pending = []
    last = {"lower": None, "upper": None}
    for c in range(n_cols):
        cand = polar[c]
        if len(cand) == 2:
            labels[(c, cand[0])] = "lower"
            labels[(c, cand[1])] = "upper"
            last = {"lower": cand[0], "upper": cand[1]}
        elif len(cand) == 1:
            lab = _assign_single(cand[0], last, jump_limit)
            if lab is None:
                pending.append(c)
            else:
                labels[(c, cand[0])] = lab
                last[lab] = cand[0]

    last = {"lower": None, "upper": None}
    unresolved = set(pending)
    for c in reversed(range(n_cols)):
        cand = polar[c]
        if len(cand) == 2:
            last = {"lower": cand[0], "upper": cand[1]}
        elif len(cand) == 1:
            if c in unresolved:
                lab = _assign_single(cand[0], last, jump_limit)
                if lab is not None:
                    labels[(c, cand[0])] = lab
                    unresolved.discard(c)
            key = (c, cand[0])
            if key in labels:
                last[labels[key]] = cand[0]

    no_history = [c for c in unresolved
                  if last["lower"] is None and last["upper"] is None]
    for c in no_history:
        p = polar[c][0]
        lab = "upper" if dark_freq is not None and p > dark_freq else "lower"
        labels[(c, p)] = lab
        unresolved.discard(c)

    out_h, out_f, out_l = [], [], []
    for (c, p), lab in sorted(labels.items()):
        out_h.append(spectrum.field_values[c])
        out_f.append(p)
        out_l.append(lab)
    skipped = n_cols - len({c for c, _ in labels})
    if skipped:
        log.info("extract_branches: %d of %d columns without peaks", skipped, n_cols)
    meta = {"n_skipped": skipped, "n_ambiguous": len(unresolved), "dark_freq": dark_freq,
            "threshold_db": thr}
    return BranchData(out_h, out_f, out_l, meta)


def _assign_single(p, last, jump_limit):
    known = {k: v for k, v in last.items() if v is not None}
    if not known:
        return None
    lab = min(known, key=lambda k: abs(known[k] - p))
    if abs(known[lab] - p) <= jump_limit:
        return lab
    if len(known) == 1:
        (only, ref), = known.items()
        return "upper" if p > ref and only == "lower" else ("lower" if p < ref and only == "upper" else None)
    return None
