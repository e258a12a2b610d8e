"""Uniform (Kittel) mode FMR frequency of a saturated prism."""

from dataclasses import dataclass, field

import numpy as np

from .constants import GAMMA_GHZ_PER_T
from .demag import DemagTensor, SampleGeometry, demag_tensor, demag_volume_average
from .errors import UnsaturatedError


@dataclass(frozen=True)
class FmrParams:
    """Inputs of the FMR dispersion.

    ``gyromagnetic_ratio`` is angular, in rad GHz / T (2*pi*28 for YIG).
    """

    geometry: SampleGeometry = field(default_factory=SampleGeometry.reference_slab)
    demag: DemagTensor = None
    gyromagnetic_ratio: float = 2 * np.pi * GAMMA_GHZ_PER_T

    def __post_init__(self):
        if not self.gyromagnetic_ratio > 0:
            raise ValueError("gyromagnetic_ratio must be positive")
        if self.demag is None:
            object.__setattr__(self, "demag", demag_tensor(self.geometry))

    @classmethod
    def averaged(cls, geometry, grid_resolution=32, **kwargs):
        return cls(geometry, demag_volume_average(geometry, grid_resolution), **kwargs)

    @classmethod
    def from_diagonal(cls, nxx, nyy, nzz, saturation_field=0.176, **kwargs):
        """Params for a bare set of demag factors (sphere, film, ...)."""
        geom = SampleGeometry((1.0, 1.0, 1.0), saturation_field=saturation_field)
        return cls(geom, DemagTensor(np.diag([nxx, nyy, nzz])), **kwargs)

    @property
    def gamma_ghz_per_t(self):
        return self.gyromagnetic_ratio / (2 * np.pi)

    @property
    def saturation_field(self):
        return self.geometry.saturation_field

    def _axes(self):
        b = self.geometry.bias_axis
        return (b + 1) % 3, (b + 2) % 3, b


def internal_field(applied_field, params):
    """Static field inside the sample, H0 - N_bb * mu0Ms, in tesla."""
    _, _, b = params._axes()
    shift = params.demag[b, b] * params.saturation_field
    if np.ndim(applied_field):
        return np.asarray(applied_field, dtype=np.float64) - shift
    return float(applied_field) - shift


def _fmr_radicand(applied_field, params, field_mode):
    t1, t2, b = params._axes()
    n = params.demag.components
    ms = params.saturation_field
    h = np.abs(np.asarray(applied_field, dtype=np.float64))
    if field_mode == "internal":
        h = np.abs(h - n[b, b] * ms)
    elif field_mode != "applied":
        raise ValueError("field_mode must be 'applied' or 'internal'")
    f1 = h + (n[t1, t1] - n[b, b]) * ms
    f2 = h + (n[t2, t2] - n[b, b]) * ms
    ellipsoid = f1 * f2
    rad = ellipsoid - ((n[t1, t2] + n[t2, t1]) * ms) ** 2
    bad = (f1 < 0) | (f2 < 0) | (rad < 0)
    return rad, bad


def fmr_frequency(applied_field, params, field_mode="applied"):
    """FMR frequency in GHz at ``applied_field`` (tesla, scalar or array).

    The Kittel form already carries the shape demagnetization, so by default
    the applied field enters directly; ``field_mode="internal"`` substitutes
    H0 - N_bb*Ms instead. Raises UnsaturatedError on a negative radicand.
    """
    rad, bad = _fmr_radicand(applied_field, params, field_mode)
    if np.any(bad):
        offending = np.asarray(applied_field, dtype=np.float64)[bad] if np.ndim(bad) else applied_field
        first = float(np.ravel(offending)[0])
        raise UnsaturatedError(first)
    f = params.gamma_ghz_per_t * np.sqrt(rad)
    return float(f) if np.ndim(f) == 0 else f


def fmr_frequency_masked(applied_field, params, field_mode="applied"):
    """Array version of fmr_frequency with NaN at unsaturated fields."""
    rad, bad = _fmr_radicand(np.atleast_1d(applied_field), params, field_mode)
    out = params.gamma_ghz_per_t * np.sqrt(np.where(bad, 0.0, rad))
    out[bad] = np.nan
    return out


def fmr_sweep(start, stop, steps, params, field_mode="applied"):
    """Fields (T) and FMR frequencies (GHz, NaN where unsaturated)."""
    fields = np.linspace(start, stop, int(steps))
    return fields, fmr_frequency_masked(fields, params, field_mode)
