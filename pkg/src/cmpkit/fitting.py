"""Least-squares fitting of polariton branch data.

Vertical (frequency) residuals at fixed field are minimised with a damped
Gauss-Newton (Levenberg-Marquardt) loop: the damping is multiplicative,
starts at 1e-3 relative to the normal-matrix diagonal, is divided by 10 on
an accepted step and multiplied by 10 on a rejected one. Bounds are
enforced by projection after every step.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import FitInputError, RankDeficiencyError
from .fmr import FmrParams, fmr_frequency_masked
from .polariton import Model, dicke_arrays, hopfield_arrays, rwa_arrays, superradiant_arrays
from .spectra import BranchData

log = logging.getLogger(__name__)

PARAM_NAMES = ("f_bm", "g", "delta_m", "f_dm", "d")

MODEL_PARAMS = {
    Model.RWA: ("f_bm", "g"),
    Model.DICKE_FULL: ("f_bm", "g"),
    Model.DICKE_SUPERRADIANT: ("f_bm", "g"),
    Model.HOPFIELD: ("f_bm", "g", "d"),
    Model.SHIFTED_DICKE: ("f_bm", "g", "delta_m"),
}

_TINY = 1e-12


@dataclass
class FitProblem:
    data: BranchData
    model: Model = Model.SHIFTED_DICKE
    fmr: FmrParams = field(default_factory=FmrParams)
    fixed: dict = field(default_factory=dict)  # name -> value, or a set of names
    initial_guess: dict = None
    bounds: dict = field(default_factory=dict)  # name -> (lo, hi), absolute
    max_iter: int = 200
    xtol: float = 1e-9
    gtol: float = 1e-10

    def __post_init__(self):
        self.model = Model.parse(self.model)
        if not isinstance(self.fixed, dict):
            self.fixed = {name: None for name in self.fixed}
        allowed = set(self.parameter_names)
        unknown = set(self.fixed) - allowed
        if unknown:
            raise FitInputError(f"cannot fix {sorted(unknown)}: not parameters of {self.model.value}")

    @property
    def parameter_names(self):
        names = MODEL_PARAMS[self.model]
        if np.any(self.data.label == "dark"):
            names = names + ("f_dm",)
        return names

    @property
    def free_names(self):
        return tuple(n for n in self.parameter_names if n not in self.fixed)


@dataclass
class FitResult:
    params: dict
    residual_rms: float
    iterations: int
    converged: bool
    param_stderr: dict
    model: str
    free: tuple
    n_points: int
    n_dropped: int = 0
    message: str = ""
    cost_history: list = field(default_factory=list)

    def to_dict(self):
        return {
            "model": self.model,
            "params": {k: float(v) for k, v in self.params.items()},
            "param_stderr": {k: float(v) for k, v in self.param_stderr.items()},
            "free": list(self.free),
            "residual_rms": float(self.residual_rms),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "n_points": int(self.n_points),
            "n_dropped": int(self.n_dropped),
            "message": self.message,
        }


def symmetrize(data):
    """Fold negative fields onto positive ones, keeping every point."""
    return BranchData(np.abs(data.field), data.freq, data.label, dict(data.metadata))


def initial_guess(data):
    """Deterministic starting point from branch extrema.

    f_DM is the median dark frequency, f_BM the midpoint between the highest
    lower-branch and the lowest upper-branch point, g half the smallest
    upper-lower separation at a shared field, delta_m zero.
    """
    h_lo, f_lo = data.select("lower")
    h_up, f_up = data.select("upper")
    if f_lo.size == 0 or f_up.size == 0:
        raise FitInputError("both polariton branches are needed for an automatic guess; "
                            "supply initial_guess explicitly")
    fields = np.abs(np.concatenate([h_lo, h_up]))
    if np.unique(np.round(fields, 12)).size < 2:
        raise FitInputError("data span a single field value")
    guess = {"f_bm": 0.5 * (f_lo.max() + f_up.min()), "delta_m": 0.0, "d": 1.0}

    lo_map = {}
    for h, f in zip(np.round(np.abs(h_lo), 12), f_lo):
        lo_map.setdefault(h, []).append(f)
    seps = [f - max(lo_map[h]) for h, f in zip(np.round(np.abs(h_up), 12), f_up) if h in lo_map]
    if seps:
        guess["g"] = 0.5 * max(min(seps), _TINY)
    else:
        guess["g"] = 0.5 * max(f_up.min() - f_lo.max(), 0.1 * guess["f_bm"])
    h_dm, f_dm = data.select("dark")
    if f_dm.size:
        guess["f_dm"] = float(np.median(f_dm))
    return {k: float(v) for k, v in guess.items()}


# ---------------------------------------------------------------------------


def _branches(model, p, magnon, continuous=True):
    w, g = p["f_bm"], p["g"]
    if model is Model.RWA:
        return rwa_arrays(w, magnon, g)
    if model is Model.DICKE_FULL:
        lo, up = dicke_arrays(w, magnon, g)
        m = magnon
    elif model is Model.SHIFTED_DICKE:
        m = magnon + p["delta_m"]
        lo, up = dicke_arrays(w, m, g)
    elif model is Model.DICKE_SUPERRADIANT:
        return superradiant_arrays(w, magnon, g)
    elif model is Model.HOPFIELD:
        return hopfield_arrays(w, magnon, g, p["d"])
    else:
        raise ValueError(model)
    if continuous:
        # continue an imaginary lower branch as -sqrt|.| so the objective stays
        # finite and smooth when the iterate leaves the stable region
        bad = np.isnan(lo)
        if np.any(bad):
            prod = w * w * m * m - 4.0 * g * g * w * m
            lo = np.where(bad, -np.sqrt(np.abs(prod)) / np.maximum(up, _TINY), lo)
    return lo, up


class _Objective:
    def __init__(self, problem):
        data = problem.data
        order = np.lexsort((data.freq, data.field, data.label.astype(str)))
        self.field = data.field[order]
        self.freq = data.freq[order]
        self.label = data.label[order]
        magnon = fmr_frequency_masked(self.field, problem.fmr)
        sat = ~np.isnan(magnon) | (self.label == "dark")
        self.n_dropped = int((~sat).sum())
        self.field, self.freq, self.label = self.field[sat], self.freq[sat], self.label[sat]
        self.magnon = np.where(np.isnan(magnon[sat]), 0.0, magnon[sat])
        self.is_lo = self.label == "lower"
        self.is_up = self.label == "upper"
        self.is_dm = self.label == "dark"
        self.model = problem.model

    def model_values(self, p):
        lo, up = _branches(self.model, p, self.magnon)
        out = np.empty_like(self.freq)
        out[self.is_lo] = lo[self.is_lo]
        out[self.is_up] = up[self.is_up]
        out[self.is_dm] = p.get("f_dm", np.nan)
        return out

    def residuals(self, p):
        return self.model_values(p) - self.freq


def _default_bounds(name, p):
    f_bm = p["f_bm"]
    return {
        "f_bm": (_TINY, np.inf),
        "g": (_TINY, f_bm),
        "delta_m": (0.0, 2.0 * f_bm),
        "f_dm": (_TINY, np.inf),
        "d": (0.0, 100.0),
    }[name]


def fit(problem):
    """Fit ``problem`` and return a FitResult.

    Raises RankDeficiencyError when a free parameter is not identifiable
    from the data. Hitting ``max_iter`` returns ``converged=False``.
    """
    obj = _Objective(problem)
    free = problem.free_names
    n = obj.freq.size
    if n == 0:
        raise FitInputError("no usable data points")
    if n < 3 * len(free):
        raise FitInputError(f"need at least {3 * len(free)} points for {len(free)} free "
                            f"parameters, got {n}")

    guess = dict(problem.initial_guess or initial_guess(problem.data))
    guess.setdefault("delta_m", 0.0)
    guess.setdefault("d", 1.0)
    for name, value in problem.fixed.items():
        if value is not None:
            guess[name] = float(value)
    missing = [k for k in problem.parameter_names if k not in guess]
    if missing:
        raise FitInputError(f"initial guess lacks {missing}")

    superradiant = problem.model is Model.DICKE_SUPERRADIANT

    def project(p):
        q = dict(p)
        for name in ("f_bm", "g", "delta_m", "f_dm", "d"):
            if name not in q:
                continue
            lo, hi = problem.bounds.get(name, _default_bounds(name, q))
            if superradiant and name == "g" and name not in problem.bounds:
                lo = 0.5 * q["f_bm"] * (1 + 1e-9)
            if name in problem.fixed:
                continue
            q[name] = float(np.clip(q[name], lo, hi))
        return q

    def unpack(x, base):
        q = dict(base)
        q.update(zip(free, x))
        return q

    p = project(guess)
    x = np.array([p[k] for k in free], dtype=np.float64)
    r = obj.residuals(p)
    if not np.all(np.isfinite(r)):
        raise FitInputError("model is undefined at the initial guess")
    cost = 0.5 * float(r @ r)
    history = [cost]

    def jacobian(x):
        cols = []
        for j, name in enumerate(free):
            step = 1e-7 * max(abs(x[j]), 1e-3)
            xp, xm = x.copy(), x.copy()
            xp[j] += step
            xm[j] -= step
            rp = obj.residuals(unpack(xp, p))
            rm = obj.residuals(unpack(xm, p))
            cols.append((rp - rm) / (2 * step))
        return np.column_stack(cols)

    _check_rank(jacobian(x), free)

    lam = 1e-3
    converged = False
    message = "maximum iterations reached"
    it = 0
    for it in range(1, problem.max_iter + 1):
        jac = jacobian(x)
        grad = jac.T @ r
        if np.max(np.abs(grad)) < problem.gtol:
            converged, message = True, "gradient norm below tolerance"
            break
        a = jac.T @ jac
        diag = np.diag(a).copy()
        diag[diag == 0] = 1.0
        accepted = False
        while lam < 1e20:
            try:
                delta = np.linalg.solve(a + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            q = project(unpack(x + delta, p))
            x_new = np.array([q[k] for k in free])
            r_new = obj.residuals(q)
            cost_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else np.inf
            if cost_new < cost:
                accepted = True
                break
            lam *= 10
        if not accepted:
            converged, message = True, "no further decrease possible"
            break
        step_norm = np.linalg.norm(x_new - x)
        x, p, r, cost = x_new, q, r_new, cost_new
        history.append(cost)
        lam = max(lam / 10, 1e-15)
        if step_norm <= problem.xtol * (np.linalg.norm(x) + problem.xtol):
            converged, message = True, "relative step below tolerance"
            break

    jac = jacobian(x)
    stderr = _stderr(jac, r, free)
    params = {k: float(p[k]) for k in problem.parameter_names}
    return FitResult(
        params=params,
        residual_rms=float(np.sqrt(np.mean(r * r))),
        iterations=it,
        converged=converged,
        param_stderr=stderr,
        model=problem.model.value,
        free=free,
        n_points=n,
        n_dropped=obj.n_dropped,
        message=message,
        cost_history=history,
    )


def _check_rank(jac, names):
    if jac.size == 0:
        return
    norms = np.linalg.norm(jac, axis=0)
    for name, nrm in zip(names, norms):
        if not nrm > 0:
            raise RankDeficiencyError(f"parameter {name!r} does not affect the residuals", name)
    _, s, vt = np.linalg.svd(jac / norms, full_matrices=False)
    if s[-1] < 1e-10 * s[0]:
        name = names[int(np.argmax(np.abs(vt[-1])))]
        raise RankDeficiencyError(f"normal equations singular; {name!r} is not identifiable", name)


def _stderr(jac, r, names):
    n, k = jac.shape
    if k == 0:
        return {}
    dof = max(n - k, 1)
    s2 = float(r @ r) / dof
    try:
        cov = np.linalg.inv(jac.T @ jac) * s2
    except np.linalg.LinAlgError:
        return {name: float("nan") for name in names}
    return {name: float(np.sqrt(max(cov[j, j], 0.0))) for j, name in enumerate(names)}
