"""Young functions, Legendre conjugates and Orlicz sequence norms.

A :class:`YoungFunction` is a convex gauge ``phi`` on ``[0, x_max]`` with
``phi(0) = 0``.  Three families are supported:

``power``       ``scale * t**p``
``power-log``   ``scale * t**p * log(e + 1/t)``
``tabulated``   piecewise linear through a sample table, extended beyond the
                last node by the last chord slope.

The Orlicz norm of a coefficient sequence is the Luxemburg gauge
``inf{M > 0 : sum phi(|a_n| / M) <= 1}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError, RangeError

__all__ = [
    "YoungFunction",
    "ProfileReport",
    "eval_young",
    "legendre_conjugate",
    "conjugate",
    "conjugate_values",
    "orlicz_norm",
    "normalized_orlicz_norm",
    "conjugate_profile_check",
    "young_inequality_check",
    "sequence_to_json",
    "sequence_from_json",
]

FAMILIES = ("power", "power-log", "tabulated")

# ternary search: stop once the bracket is below this (relative below y = 1)
TERNARY_TOL = 1e-10
Y_CAP = 2.0**40
BISECT_RTOL = 1e-10
CONVEXITY_TOL = 1e-12
N_DYADIC = 64


@dataclass(frozen=True, eq=False)
class YoungFunction:
    """Evaluable convex gauge.

    ``c_dbl`` (empirical doubling constant near 0) and ``convex`` are filled
    in at construction from a 64-point dyadic grid ``x_max * 2**-k``.
    """

    family: str
    params: tuple = ()
    samples: tuple | None = None
    x_max: float = 16.0
    c_dbl: float = field(init=False, default=math.nan)
    convex: bool = field(init=False, default=True)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown Young family {self.family!r}")
        if self.x_max <= 0:
            raise ValueError("x_max must be positive")
        if self.family == "tabulated":
            if self.samples is None:
                raise ValueError("tabulated Young function needs samples")
            xs = np.asarray(self.samples[0], dtype=float)
            ys = np.asarray(self.samples[1], dtype=float)
            if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
                raise ValueError("samples must be two equal-length 1-d tables")
            if np.any(np.diff(xs) <= 0):
                raise ValueError("sample abscissae must be strictly increasing")
            if xs[0] != 0.0:
                xs = np.concatenate([[0.0], xs])
                ys = np.concatenate([[0.0], ys])
            if ys[0] != 0.0:
                raise PreconditionError("tabulated Young function must vanish at 0")
            if np.any(np.diff(ys) < -CONVEXITY_TOL):
                raise PreconditionError("tabulated Young function must be nondecreasing")
            xs.setflags(write=False)
            ys.setflags(write=False)
            object.__setattr__(self, "samples", (xs, ys))
        else:
            params = tuple(float(p) for p in self.params) or (2.0,)
            if len(params) == 1:
                params = params + (1.0,)
            if params[0] < 1.0:
                raise PreconditionError("exponent p must be >= 1 for convexity")
            object.__setattr__(self, "params", params)
        grid = self.dyadic_grid()
        vals = self.values(grid)
        object.__setattr__(self, "convex", bool(_second_differences(grid, vals).min() >= -CONVEXITY_TOL))
        small = grid[grid <= self.x_max / 4]
        base = self.values(small)
        keep = base > 0
        ratio = self.values(2 * small[keep]) / base[keep] if keep.any() else np.array([math.nan])
        object.__setattr__(self, "c_dbl", float(np.max(ratio)))

    # -- constructors -------------------------------------------------------
    @classmethod
    def power(cls, p, scale=1.0, x_max=16.0):
        return cls("power", (p, scale), x_max=x_max)

    @classmethod
    def power_log(cls, p=2.0, scale=1.0, x_max=16.0):
        return cls("power-log", (p, scale), x_max=x_max)

    @classmethod
    def tabulated(cls, xs, ys, x_max=None):
        xs = np.asarray(xs, dtype=float)
        return cls("tabulated", (), (xs, np.asarray(ys, dtype=float)), x_max=float(x_max or xs[-1]))

    # -- evaluation ---------------------------------------------------------
    def dyadic_grid(self):
        return self.x_max * 2.0 ** -np.arange(N_DYADIC - 1, -1, -1, dtype=float)

    def values(self, x):
        """Evaluate without a domain check (closed forms extend naturally,
        tables extend by the last chord)."""
        x = np.asarray(x, dtype=float)
        if self.family == "tabulated":
            xs, ys = self.samples
            out = np.interp(x, xs, ys)
            slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            beyond = x > xs[-1]
            if np.any(beyond):
                out = np.where(beyond, ys[-1] + slope * (x - xs[-1]), out)
            return out
        p = self.params[0]
        scale = self.params[1] if len(self.params) > 1 else 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            base = scale * np.power(x, p)
            if self.family == "power-log":
                base = np.where(x > 0, base * np.log(np.e + 1.0 / x), 0.0)
        return base

    def __call__(self, x):
        return eval_young(self, x)

    # -- serialization -----------------------------------------------------
    def to_dict(self):
        out = {"family": self.family, "params": list(self.params), "x_max": self.x_max}
        if self.samples is not None:
            out["samples"] = [[float(a), float(b)] for a, b in zip(*self.samples)]
        return out

    @classmethod
    def from_dict(cls, data):
        samples = None
        if data.get("samples") is not None:
            table = np.asarray(data["samples"], dtype=float)
            samples = (table[:, 0], table[:, 1])
        return cls(data["family"], tuple(data.get("params", ())), samples, float(data.get("x_max", 16.0)))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _second_differences(x, y):
    d1 = np.diff(y) / np.diff(x)
    return np.diff(d1) / (x[2:] - x[:-2])


def eval_young(phi: YoungFunction, x):
    """Return ``phi(x)`` for ``0 <= x <= x_max`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > phi.x_max) or np.any(~np.isfinite(arr)):
        raise DomainError(f"argument outside [0, {phi.x_max}]")
    out = phi.values(arr)
    return float(out) if out.ndim == 0 else out


def conjugate_values(phi: YoungFunction, x, y_cap=Y_CAP):
    """``sup_{y >= 0} (x*y - phi(y))`` at each point of ``x``.

    Vectorized ternary search on the concave map ``y -> x*y - phi(y)``.  The
    search interval ``[0, y_hi]`` starts at ``y_hi = 1`` and is widened by a
    factor 4 wherever the objective is still increasing at the right end.
    """
    if not phi.convex:
        raise PreconditionError("Legendre conjugate requires a convex Young function")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y_hi = np.ones_like(x)
    best = np.empty_like(x)
    todo = np.ones(x.shape, dtype=bool)
    while todo.any():
        xs = x[todo]
        lo = np.zeros_like(xs)
        hi = y_hi[todo].copy()
        g = lambda y: xs * y - phi.values(y)  # noqa: E731
        for _ in range(400):
            width = hi - lo
            tol = TERNARY_TOL * np.minimum(1.0, np.maximum(lo, 1e-20))
            if np.all(width <= tol):
                break
            a = lo + width / 3
            b = hi - width / 3
            left = g(a) < g(b)
            lo = np.where(left, a, lo)
            hi = np.where(left, hi, b)
        y = 0.5 * (lo + hi)
        val = np.maximum(g(y), 0.0)
        top = y_hi[todo]
        rising = g(top) > g(0.5 * top) + 1e-15 * np.abs(g(top))
        rising &= y > top * (1 - 1e-6)
        idx = np.flatnonzero(todo)
        best[idx] = val
        done = ~rising
        todo[idx[done]] = False
        y_hi[idx[rising]] *= 4.0
        if np.any(y_hi[todo] > y_cap):
            raise RangeError("supremum not attained below the y cap (conjugate is infinite)")
    return best


def legendre_conjugate(phi: YoungFunction, x_grid) -> YoungFunction:
    """Tabulate the convex conjugate of ``phi`` on a sorted positive grid."""
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.ndim != 1 or len(x_grid) < 1 or np.any(x_grid <= 0) or np.any(np.diff(x_grid) <= 0):
        raise PreconditionError("x_grid must be sorted, positive and strictly increasing")
    vals = conjugate_values(phi, x_grid)
    xs = np.concatenate([[0.0], x_grid])
    ys = np.concatenate([[0.0], vals])
    if len(xs) == 2:
        xs = np.array([0.0, x_grid[0] / 2, x_grid[0]])
        ys = np.array([0.0, conjugate_values(phi, [x_grid[0] / 2])[0], vals[0]])
    return YoungFunction.tabulated(xs, ys, x_max=float(x_grid[-1]))


def conjugate(phi: YoungFunction, x_grid=None) -> YoungFunction:
    """Conjugate in closed form when available, otherwise tabulated.

    For ``scale * t**p`` with ``p > 1`` the conjugate is
    ``(p - 1) * scale * (x / (p * scale))**(p / (p - 1))``.
    """
    if phi.family == "power" and phi.params[0] > 1:
        p, scale = phi.params[0], phi.params[1]
        q = p / (p - 1)
        c = (p - 1) * scale * (p * scale) ** (-q)
        return YoungFunction.power(q, c, x_max=phi.x_max)
    if x_grid is None:
        x_grid = np.geomspace(1e-12, phi.x_max, 4000)
    return legendre_conjugate(phi, x_grid)


def _modular(absval, phi, m):
    return float(np.sum(phi.values(absval / m)))


def orlicz_norm(a, phi: YoungFunction) -> float:
    """Luxemburg norm ``inf{M > 0 : sum phi(|a_n|/M) <= 1}`` by bisection."""
    absval = np.abs(np.asarray(a, dtype=complex).ravel())
    if not np.all(np.isfinite(absval)):
        raise PreconditionError("sequence has non-finite entries")
    if absval.size == 0 or absval.max() == 0:
        return 0.0
    lo = float(absval.max())
    hi = float(absval.sum())
    for _ in range(2000):
        if _modular(absval, phi, hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise RangeError("could not bracket the Orlicz norm from above")
    for _ in range(2000):
        if _modular(absval, phi, lo) > 1.0:
            break
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    lo = min(lo, hi)
    while hi - lo > BISECT_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if _modular(absval, phi, mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def normalized_orlicz_norm(a, phi: YoungFunction) -> float:
    """Orlicz norm scaled so that a unit coordinate vector has norm 1.

    For ``phi = c * t**p`` this is exactly the l^p norm.
    """
    return orlicz_norm(a, phi) / orlicz_norm([1.0], phi)


@dataclass
class ProfileReport:
    hypothesis_met: bool
    k: np.ndarray | None = None
    ratios: np.ndarray | None = None
    nonincreasing: bool | None = None
    verdict: bool | None = None
    note: str = ""


def conjugate_profile_check(phi: YoungFunction, k_max: int) -> ProfileReport:
    """Tabulate ``phi*(2**-k) / 4**-k`` for ``k = 1..k_max``.

    Requires ``phi(x)/x**2`` nondecreasing as ``x`` decreases along the dyadic
    grid.  ``verdict`` is true iff the ratios are nonincreasing (tolerance
    1e-9) and the last is strictly below the first.
    """
    xs = 2.0 ** -np.arange(0, max(k_max, 1) + 40, dtype=float)
    r = phi.values(xs) / xs**2
    if np.any(r[1:] < r[:-1] * (1 - 1e-12)):
        return ProfileReport(False, note="hypothesis not met: phi(x)/x^2 does not increase as x decreases")
    k = np.arange(1, k_max + 1)
    x = 2.0 ** -k.astype(float)
    ratios = conjugate_values(phi, x) / x**2
    noninc = bool(np.all(np.diff(ratios) <= 1e-9))
    verdict = noninc and bool(ratios[-1] < ratios[0] * (1 - 1e-9))
    return ProfileReport(True, k, ratios, noninc, verdict, "conjugate taken as sup_y (xy - phi(y))")


def young_inequality_check(phi: YoungFunction, pairs, conj: YoungFunction | None = None) -> float:
    """Largest value of ``x*y - phi(x) - phi*(y)`` over ``pairs``.

    ``phi*`` is computed exactly at each ``y`` unless a tabulated conjugate
    is supplied.
    """
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    if pairs.size == 0:
        return 0.0
    x, y = pairs[:, 0], pairs[:, 1]
    dual = conj.values(y) if conj is not None else conjugate_values(phi, y)
    return float(np.max(x * y - phi.values(x) - dual))


def sequence_to_json(a) -> str:
    a = np.asarray(a, dtype=complex).ravel()
    return json.dumps([[float(v.real), float(v.imag)] for v in a])


def sequence_from_json(text) -> np.ndarray:
    data = json.loads(text) if isinstance(text, str) else text
    if len(data) == 0:
        return np.zeros(0, dtype=complex)
    arr = np.asarray(data, dtype=float).reshape(-1, 2)
    return arr[:, 0] + 1j * arr[:, 1]
