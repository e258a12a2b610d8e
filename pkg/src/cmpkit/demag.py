"""Demagnetizing tensor of a uniformly magnetized rectangular prism.

First-order Joseph-Schloemann components: the diagonal terms are an
eight-corner arccotangent sum and the off-diagonal terms a logarithmic
corner ratio. Both are pointwise; ``demag_volume_average`` integrates them
over the prism with the midpoint rule.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError

AXES = {"x": 0, "y": 1, "z": 2}
BOUNDARY_MARGIN = 1e-9  # relative to min(half_dims)

# slab of 3.82 x 6.09 x 0.61 mm^3: thickness along x, length along y, bias along z
REFERENCE_SLAB_DIMS_MM = (0.61, 6.09, 3.82)


def axis_index(axis):
    if isinstance(axis, str):
        try:
            return AXES[axis.lower()]
        except KeyError:
            raise ValueError(f"axis must be one of x, y, z; got {axis!r}") from None
    idx = int(axis)
    if idx not in (0, 1, 2):
        raise ValueError(f"axis index must be 0, 1 or 2; got {axis!r}")
    return idx


@dataclass(frozen=True)
class SampleGeometry:
    """Rectangular prism centred on the origin.

    ``half_dims`` are half-edge lengths in metres, ``saturation_field`` is
    mu0*Ms in tesla and ``bias_axis`` the index of the static-field axis.
    """

    half_dims: tuple
    saturation_field: float = 0.176
    bias_axis: int = 2

    def __post_init__(self):
        dims = tuple(float(v) for v in self.half_dims)
        if len(dims) != 3:
            raise ValueError("half_dims must have three entries")
        if not all(np.isfinite(dims)) or min(dims) <= 0:
            raise ValueError(f"half_dims must be strictly positive, got {dims}")
        if not self.saturation_field >= 0:
            raise ValueError("saturation_field must be >= 0")
        object.__setattr__(self, "half_dims", dims)
        object.__setattr__(self, "bias_axis", axis_index(self.bias_axis))

    @classmethod
    def from_dims_mm(cls, dims_mm, **kwargs):
        """Build from full edge lengths in millimetres."""
        return cls(tuple(0.5e-3 * float(d) for d in dims_mm), **kwargs)

    @classmethod
    def reference_slab(cls, **kwargs):
        return cls.from_dims_mm(REFERENCE_SLAB_DIMS_MM, **kwargs)

    @property
    def volume(self):
        ax, ay, az = self.half_dims
        return 8.0 * ax * ay * az


@dataclass(frozen=True)
class DemagTensor:
    components: np.ndarray
    eval_point: object = "center"  # position vector or "volume-averaged"

    def __post_init__(self):
        comp = np.array(self.components, dtype=np.float64)
        if comp.shape != (3, 3):
            raise ValueError("components must be 3x3")
        comp.setflags(write=False)
        object.__setattr__(self, "components", comp)

    def __getitem__(self, idx):
        return self.components[idx]

    @property
    def diag(self):
        return tuple(float(v) for v in np.diag(self.components))

    @property
    def trace(self):
        return float(np.trace(self.components))

    def to_dict(self):
        point = self.eval_point
        if not isinstance(point, str):
            point = [float(v) for v in point]
        names = "xyz"
        out = {f"N_{names[i]}{names[j]}": float(self.components[i, j]) + 0.0
               for i in range(3) for j in range(i, 3)}
        out["eval_point"] = point
        return out


def _checked_points(geom, points):
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if p.shape[-1] != 3:
        raise ValueError("points must have three coordinates")
    a = np.asarray(geom.half_dims)
    margin = BOUNDARY_MARGIN * a.min()
    bad = np.any(a - np.abs(p) <= margin, axis=1)
    if np.any(bad):
        raise DomainError(f"point {p[np.argmax(bad)].tolist()} is not strictly inside the prism")
    return p


def demag_tensor_points(geom, points):
    """Pointwise tensors at an (n, 3) array of interior points, shape (n, 3, 3)."""
    return kernels.demag_tensor_points(_checked_points(geom, points), geom.half_dims)


def demag_diag(geom, point):
    """(N_xx, N_yy, N_zz) at an interior point."""
    n = demag_tensor_points(geom, point)[0]
    return float(n[0, 0]), float(n[1, 1]), float(n[2, 2])


def demag_offdiag(geom, point):
    """(N_xy, N_yz, N_zx) at an interior point."""
    n = demag_tensor_points(geom, point)[0]
    return float(n[0, 1]), float(n[1, 2]), float(n[2, 0])


def demag_tensor(geom, point=None):
    """Full tensor at ``point``; the prism centre by default."""
    if point is None:
        point = np.zeros(3)
        label = "center"
    else:
        label = tuple(float(v) for v in np.asarray(point, dtype=np.float64).ravel())
    return DemagTensor(demag_tensor_points(geom, point)[0], eval_point=label)


def demag_volume_average(geom, grid_resolution=32, chunk=65536):
    """Midpoint-rule volume average of the pointwise tensor.

    ``grid_resolution`` is the number of cells per axis (an int or a
    triple). Chunks are reduced in a fixed order so the result does not
    depend on the backend's thread count.
    """
    res = np.broadcast_to(np.asarray(grid_resolution, dtype=np.int64), (3,))
    if np.any(res < 2):
        raise ValueError("grid_resolution must be >= 2")
    a = np.asarray(geom.half_dims)
    axes = [((np.arange(n) + 0.5) / n * 2.0 - 1.0) * ai for n, ai in zip(res, a)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)

    total = np.zeros((3, 3))
    for start in range(0, grid.shape[0], chunk):
        block = kernels.demag_tensor_points(grid[start:start + chunk], a)
        total += _pairwise_sum(block)
    return DemagTensor(total / grid.shape[0], eval_point="volume-averaged")


def _pairwise_sum(block):
    # numpy only sums pairwise along the contiguous axis
    flat = np.ascontiguousarray(block.reshape(-1, 9).T)
    return flat.sum(axis=1).reshape(3, 3)
