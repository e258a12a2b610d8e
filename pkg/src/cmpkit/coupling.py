"""Filling factor, coupling strength and coupling-regime classification."""

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import PhysicalConstants
from .demag import axis_index
from .errors import UndefinedFillingFactorError


class Regime(str, enum.Enum):
    SC = "SC"
    USC = "USC"
    DSC = "DSC"


@dataclass(frozen=True)
class FieldMap:
    """RF magnetic field sampled on a uniform grid of cells.

    ``h`` is (n, 3) in any common unit, ``in_sample`` flags the cells that
    belong to the magnetic sample. ``shape`` (optional) is the grid shape
    for a flat C-ordered cell list.
    """

    spacing: tuple
    h: np.ndarray
    in_sample: np.ndarray
    shape: tuple = None

    def __post_init__(self):
        spacing = tuple(float(s) for s in self.spacing)
        if len(spacing) != 3 or min(spacing) <= 0:
            raise ValueError("spacing must be three positive lengths")
        h = np.asarray(self.h, dtype=np.float64).reshape(-1, 3)
        mask = np.asarray(self.in_sample, dtype=bool).ravel()
        if h.shape[0] == 0:
            raise ValueError("field map has no cells")
        if mask.shape[0] != h.shape[0]:
            raise ValueError("in_sample length does not match the number of cells")
        if not mask.any():
            raise ValueError("field map has no in-sample cells")
        if not np.all(np.isfinite(h)):
            raise ValueError("field map contains non-finite values")
        shape = self.shape
        if shape is not None:
            shape = tuple(int(s) for s in shape)
            if int(np.prod(shape)) != h.shape[0]:
                raise ValueError(f"shape {shape} does not match {h.shape[0]} cells")
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "in_sample", mask)
        object.__setattr__(self, "shape", shape)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def positions(self):
        """Cell centres for a gridded map, origin at the first cell corner."""
        if self.shape is None:
            raise ValueError("positions need a grid shape")
        axes = [(np.arange(n) + 0.5) * d for n, d in zip(self.shape, self.spacing)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)

    @classmethod
    def from_json(cls, source):
        if isinstance(source, (str, Path)):
            data = json.loads(Path(source).read_text())
        else:
            data = source
        h = np.stack([np.asarray(data[k], dtype=np.float64) for k in ("hx", "hy", "hz")], axis=1)
        return cls(spacing=data["spacing_m"], h=h, in_sample=data["in_sample"],
                   shape=data.get("shape"))

    def to_json(self, path=None):
        data = {
            "spacing_m": list(self.spacing),
            "shape": list(self.shape) if self.shape is not None else [self.h.shape[0], 1, 1],
            "hx": self.h[:, 0].tolist(),
            "hy": self.h[:, 1].tolist(),
            "hz": self.h[:, 2].tolist(),
            "in_sample": [bool(v) for v in self.in_sample],
        }
        if path is not None:
            Path(path).write_text(json.dumps(data))
        return data


def filling_factor(field_map, bias_axis="z"):
    """Fraction of transverse RF field concentrated in the sample, in [0, 1].

    Integrals are midpoint sums weighted by the cell volume.
    """
    b = axis_index(bias_axis)
    t1, t2 = (b + 1) % 3, (b + 2) % 3
    dv = field_map.cell_volume
    peak = np.max(np.abs(field_map.h))
    if peak == 0:
        raise UndefinedFillingFactorError("filling factor undefined for an all-zero field")
    h = field_map.h / peak  # amplitude-free
    inside = h[field_map.in_sample]
    total = np.sum(np.ascontiguousarray((h * h).sum(axis=1))) * dv
    s1 = np.sum(np.ascontiguousarray(inside[:, t1])) * dv
    s2 = np.sum(np.ascontiguousarray(inside[:, t2])) * dv
    v_m = inside.shape[0] * dv
    eta2 = (s1 * s1 + s2 * s2) / (v_m * total)
    return float(min(np.sqrt(eta2), 1.0))


def rank_field_maps(field_maps, bias_axis="z"):
    """(name, eta) pairs sorted by decreasing filling factor."""
    scored = [(name, filling_factor(m, bias_axis)) for name, m in dict(field_maps).items()]
    return sorted(scored, key=lambda item: (-item[1], item[0]))


def _coupling_prefactor(constants):
    # (gamma / 4 pi) * sqrt(mu / (g_l mu_B) * mu0 * hbar * n_s), units Hz / sqrt(rad/s)
    c = constants
    return c.gyromagnetic_ratio / (4 * np.pi) * np.sqrt(
        c.spins_per_moment * c.vacuum_permeability * c.reduced_planck * c.spin_density)


def coupling_strength(eta, cavity_freq, constants=None):
    """Coupling g/2pi in GHz for filling factor ``eta`` and cavity frequency in GHz."""
    constants = constants or PhysicalConstants()
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    if not np.all(np.asarray(cavity_freq) > 0):
        raise ValueError("cavity_freq must be > 0")
    omega = 2 * np.pi * np.asarray(cavity_freq, dtype=np.float64) * 1e9
    g = eta * np.sqrt(omega) * _coupling_prefactor(constants) * 1e-9
    return float(g) if np.ndim(g) == 0 else g


def dsc_threshold_frequency(eta, constants=None):
    """Cavity frequency (GHz) below which g/omega exceeds 1."""
    constants = constants or PhysicalConstants()
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    return float(2 * np.pi * (eta * _coupling_prefactor(constants)) ** 2 * 1e-9)


def classify_regime(g_over_omega):
    if not g_over_omega >= 0:
        raise ValueError("g_over_omega must be >= 0")
    if g_over_omega < 0.1:
        return Regime.SC
    if g_over_omega < 1.0:
        return Regime.USC
    return Regime.DSC


@dataclass(frozen=True)
class CouplingResult:
    eta: float
    g_over_2pi: float
    g_over_omega: float
    regime: Regime


def evaluate_coupling(eta, cavity_freq, constants=None):
    g = coupling_strength(eta, cavity_freq, constants)
    ratio = g / cavity_freq
    return CouplingResult(eta, g, ratio, classify_regime(ratio))


def table_consistency(g_over_2pi, f_bm):
    """(g/omega, g^2/(2 pi omega)) from a table row's g/2pi and f_BM, both in GHz."""
    if not f_bm > 0:
        raise ValueError("f_bm must be > 0")
    return g_over_2pi / f_bm, g_over_2pi ** 2 / f_bm
