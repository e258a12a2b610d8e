"""Closed-form polariton branch frequencies.

Every formula here is homogeneous of degree one in frequency, so all inputs
and outputs are ordinary frequencies in GHz.
"""

import enum
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import PhaseValidityError, SingularDiamagneticError, UnstableRegimeError


class Model(str, enum.Enum):
    RWA = "rwa"
    DICKE_FULL = "dicke"
    DICKE_SUPERRADIANT = "superradiant"
    HOPFIELD = "hopfield"
    SHIFTED_DICKE = "shifted-dicke"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        aliases = {"dicke-full": "dicke", "dicke-superradiant": "superradiant",
                   "shifted": "shifted-dicke", "shifteddicke": "shifted-dicke"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown model {name!r}; expected one of {names}") from None


@dataclass(frozen=True)
class DispersionModelParams:
    cavity_freq: float
    coupling: float
    magnon_shift: float = 0.0
    hopfield_prefactor: float = 1.0
    model: Model = Model.SHIFTED_DICKE
    literal_hopfield: bool = False  # use the printed form with omega_c^2 twice

    def __post_init__(self):
        object.__setattr__(self, "model", Model.parse(self.model))
        if not self.cavity_freq > 0:
            raise ValueError("cavity_freq must be > 0")
        if not self.coupling >= 0:
            raise ValueError("coupling must be >= 0")
        if not self.magnon_shift >= 0:
            raise ValueError("magnon_shift must be >= 0")

    @property
    def g_over_omega(self):
        return self.coupling / self.cavity_freq

    def with_(self, **changes):
        return replace(self, **changes)


class BranchPair(NamedTuple):
    lower: float
    upper: float


# ---------------------------------------------------------------------------
# vectorised kernels: NaN marks an imaginary branch


def _sorted_pair(a2, m2, c):
    """Roots of x^2 - (a2 + m2) x + (a2 m2 - c/4), as square-rooted frequencies.

    The lower root is taken from the product of roots to avoid cancellation.
    """
    a2, m2, c = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (a2, m2, c)))
    s = a2 + m2
    r = np.sqrt((a2 - m2) ** 2 + c)
    up2 = 0.5 * (s + r)
    prod = a2 * m2 - 0.25 * c
    with np.errstate(divide="ignore", invalid="ignore"):
        lo2 = np.where(up2 > 0, prod / np.where(up2 > 0, up2, 1.0), 0.0)
    lo2 = np.where(np.abs(lo2) <= 1e-15 * np.maximum(up2, 1e-300), 0.0, lo2)
    lower = np.where(lo2 >= 0, np.sqrt(np.abs(lo2)), np.nan)
    return lower, np.sqrt(up2)


def dicke_arrays(cavity, magnon, g):
    w = np.asarray(cavity, dtype=np.float64)
    m = np.asarray(magnon, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    return _sorted_pair(w * w, m * m, 16.0 * g * g * w * m)


def rwa_arrays(cavity, magnon, g):
    w = np.asarray(cavity, dtype=np.float64)
    m = np.asarray(magnon, dtype=np.float64)
    mean = 0.5 * (w + m)
    split = np.sqrt((0.5 * (w - m)) ** 2 + np.asarray(g, dtype=np.float64) ** 2)
    return np.maximum(mean - split, 0.0), mean + split


def superradiant_arrays(cavity, magnon, g):
    w = np.asarray(cavity, dtype=np.float64)
    m = np.asarray(magnon, dtype=np.float64)
    gt = 2.0 * np.asarray(g, dtype=np.float64) / w
    return _sorted_pair(w * w, gt ** 4 * m * m, 4.0 * w * w * m * m)


def hopfield_arrays(cavity, magnon, g, d=1.0, literal=False):
    w = np.asarray(cavity, dtype=np.float64)
    m = np.asarray(magnon, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        dia = np.where(g == 0, 0.0, g * g / np.where(m == 0, np.nan, m))
    a2 = w * w + 4.0 * d * dia * w
    c = 16.0 * g * g * w * m
    if not literal:
        return _sorted_pair(a2, m * m, c)
    s = a2 + w * w
    r = np.sqrt((a2 - m * m) ** 2 + c)
    lo2 = 0.5 * (s - r)
    return np.where(lo2 >= 0, np.sqrt(np.abs(lo2)), np.nan), np.sqrt(0.5 * (s + r))


def branch_arrays(params, magnon_freq):
    """(lower, upper) arrays for ``params.model`` at the given magnon frequencies."""
    w, g = params.cavity_freq, params.coupling
    m = np.asarray(magnon_freq, dtype=np.float64)
    model = params.model
    if model is Model.RWA:
        return rwa_arrays(w, m, g)
    if model is Model.DICKE_FULL:
        return dicke_arrays(w, m, g)
    if model is Model.SHIFTED_DICKE:
        return dicke_arrays(w, m + params.magnon_shift, g)
    if model is Model.DICKE_SUPERRADIANT:
        return superradiant_arrays(w, m, g)
    if model is Model.HOPFIELD:
        return hopfield_arrays(w, m, g, params.hopfield_prefactor, params.literal_hopfield)
    raise ValueError(f"unsupported model {model!r}")


# ---------------------------------------------------------------------------
# scalar operations


def _pair(lower, upper, what):
    lo, up = float(lower), float(upper)
    if np.isnan(lo):
        raise UnstableRegimeError(f"{what}: lower-branch radicand is negative")
    return BranchPair(lo, up)


def _check_magnon(magnon_freq):
    if not magnon_freq >= 0:
        raise ValueError(f"magnon_freq must be >= 0, got {magnon_freq!r}")


def dicke_full(params, magnon_freq):
    """Hopfield-Bogoliubov branches of the Dicke model, counter-rotating terms kept."""
    _check_magnon(magnon_freq)
    return _pair(*dicke_arrays(params.cavity_freq, magnon_freq, params.coupling),
                 f"Dicke model unstable (4 g^2 > omega * omega_m at omega_m={magnon_freq})")


def rwa(params, magnon_freq):
    _check_magnon(magnon_freq)
    return BranchPair(*map(float, rwa_arrays(params.cavity_freq, magnon_freq, params.coupling)))


def dicke_superradiant(params, magnon_freq):
    _check_magnon(magnon_freq)
    if not params.coupling / params.cavity_freq > 0.5:
        raise PhaseValidityError(
            f"superradiant phase needs g/omega > 0.5, got {params.coupling / params.cavity_freq:.4g}")
    return _pair(*superradiant_arrays(params.cavity_freq, magnon_freq, params.coupling),
                 "superradiant branches")


def hopfield(params, magnon_freq):
    """Modified Hopfield model with diamagnetic prefactor ``hopfield_prefactor``."""
    _check_magnon(magnon_freq)
    if magnon_freq == 0 and params.coupling > 0 and params.hopfield_prefactor != 0:
        raise SingularDiamagneticError("D = g^2 / omega_m diverges at omega_m = 0")
    return _pair(*hopfield_arrays(params.cavity_freq, magnon_freq, params.coupling,
                                  params.hopfield_prefactor, params.literal_hopfield),
                 "Hopfield branches")


def shifted_dicke(params, magnon_freq):
    """Dicke branches with the magnon frequency shifted by ``magnon_shift``."""
    _check_magnon(magnon_freq)
    return _pair(*dicke_arrays(params.cavity_freq, magnon_freq + params.magnon_shift,
                               params.coupling),
                 "shifted Dicke model unstable")


MODEL_FUNCS = {
    Model.RWA: rwa,
    Model.DICKE_FULL: dicke_full,
    Model.DICKE_SUPERRADIANT: dicke_superradiant,
    Model.HOPFIELD: hopfield,
    Model.SHIFTED_DICKE: shifted_dicke,
}


def branches(params, magnon_freq):
    """Scalar BranchPair for whichever model ``params`` selects."""
    return MODEL_FUNCS[params.model](params, magnon_freq)


def zero_field_gap(params, zero_field_magnon=0.0):
    """Upper-branch offset above the cavity at zero applied field (GHz).

    Only the upper branch is needed, which stays real even where the lower
    one is unstable.
    """
    if params.model not in (Model.SHIFTED_DICKE, Model.DICKE_FULL):
        raise ValueError("zero_field_gap is defined for the (shifted) Dicke model")
    shift = params.magnon_shift if params.model is Model.SHIFTED_DICKE else 0.0
    _, upper = dicke_arrays(params.cavity_freq, zero_field_magnon + shift, params.coupling)
    return float(upper) - params.cavity_freq
