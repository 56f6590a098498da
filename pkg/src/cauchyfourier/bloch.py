"""Weighted Bloch norms and the diagnostics built on them.

The supremum over the disk is taken on a tensor grid: radii ``1 - 2**-j``
for ``j = 0..12`` and 256 equally spaced angles, unless a caller supplies
its own grid.  Each circle of the grid is evaluated with one FFT.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import TaylorSeries, dilate, sample_on_circle, series_derivative, series_divide
from .errors import PreconditionError
from .majorants import Majorant
from .orlicz import YoungFunction, orlicz_norm

__all__ = [
    "DEFAULT_RADII",
    "DEFAULT_ANGLES",
    "FOURIER_C",
    "BlochNorm",
    "FourierReport",
    "EmbeddingReport",
    "CyclicityReport",
    "MonotoneTable",
    "bloch_norm",
    "fourier_bound_report",
    "embedding_report",
    "cyclicity_diagnostic",
]

DEFAULT_RADII = 1.0 - 2.0 ** -np.arange(0, 13, dtype=float)
DEFAULT_ANGLES = 256
FOURIER_C = 16.0


@dataclass
class BlochNorm:
    value: float
    f0: float
    seminorm: float
    argmax: complex
    radii: np.ndarray
    n_theta: int

    def __float__(self):
        return self.value


def _weighted_derivative_grid(f, w, radii, n_theta):
    """Rows of ``(1-r)/w(1-r) * |f'(r e^{i theta})|`` for each radius."""
    df = series_derivative(f)
    rows = []
    for r in radii:
        t = 1.0 - r
        vals = np.abs(sample_on_circle(df, n_theta, r))
        rows.append(vals * (t / w(t)))
    return np.array(rows)


def bloch_norm(f: TaylorSeries, w: Majorant, radii=None, n_theta: int = DEFAULT_ANGLES) -> BlochNorm:
    """``|f(0)| + sup (1-|z|)/w(1-|z|) |f'(z)|`` over the grid."""
    radii = DEFAULT_RADII if radii is None else np.asarray(radii, dtype=float)
    if radii.size == 0 or n_theta < 1:
        raise PreconditionError("grids must be nonempty")
    if np.any(radii >= 1) or np.any(radii < 0):
        raise PreconditionError("radii must lie in [0, 1)")
    grid = _weighted_derivative_grid(f, w, radii, n_theta)
    idx = int(np.argmax(grid))
    i, j = divmod(idx, n_theta)
    sup = float(grid.flat[idx])
    f0 = abs(complex(f.coeffs[0]))
    z = radii[i] * np.exp(2j * math.pi * j / n_theta)
    return BlochNorm(f0 + sup, f0, sup, complex(z), radii, n_theta)


@dataclass
class FourierReport:
    N: np.ndarray
    sum_ratios: np.ndarray
    coeff_ratios: np.ndarray
    norm: float
    max_sum_ratio: float
    max_coeff_ratio: float
    holds: bool
    trivial: bool = False


def fourier_bound_report(f: TaylorSeries, w: Majorant, norm: float | None = None, **grid) -> FourierReport:
    """Normalized partial sums of ``n**2 |f_n|**2`` and per-coefficient ratios.

    ``sum_ratios[N-1] = sum_{n<=N} n**2 |f_n|**2 / (N**2 w(1/N)**2 ||f||_w**2)``.
    The bound checked is ``16`` for ``N >= 2``, both for the partial sums and
    for ``|f_n| / (w(1/n) ||f||_w)``.
    """
    if norm is None:
        norm = bloch_norm(f, w, **grid).value
    d = f.degree
    if d == 0 or not np.any(f.coeffs[1:]):
        empty = np.zeros(0)
        return FourierReport(np.arange(1, d + 1), empty, empty, norm, 0.0, 0.0, True, trivial=True)
    n = np.arange(1, d + 1, dtype=float)
    a = np.abs(f.coeffs[1:])
    wn = w(1.0 / n)
    sums = np.cumsum(n**2 * a**2) / (n**2 * wn**2 * norm**2)
    coeff = a / (wn * norm)
    tail = sums[1:] if d >= 2 else np.zeros(0)
    max_sum = float(tail.max()) if tail.size else 0.0
    max_coeff = float(coeff.max())
    holds = max_sum <= FOURIER_C and max_coeff <= FOURIER_C
    return FourierReport(n.astype(int), sums, coeff, norm, max_sum, max_coeff, bool(holds))


@dataclass
class EmbeddingReport:
    ratio: float
    orlicz: float
    bloch: float
    blocks: list = field(default_factory=list)  # (k, sum over 2**k <= n < 2**(k+1))


def embedding_report(f: TaylorSeries, w: Majorant, psi: YoungFunction, **grid) -> EmbeddingReport:
    """``||f||_psi / ||f||_w`` and the dyadic blocks of ``sum psi(|f_n| / ||f||_w)``.

    The zero function gives ``ratio = nan`` (the 0/0 sentinel).
    """
    a = f.coeffs
    if not np.any(a):
        return EmbeddingReport(math.nan, 0.0, 0.0, [])
    bn = bloch_norm(f, w, **grid).value
    on = orlicz_norm(a, psi)
    scaled = psi.values(np.abs(a) / bn)
    blocks = [(0, float(scaled[0]))]
    k = 0
    while 2**k < len(a):
        blocks.append((k + 1, float(scaled[2**k : 2 ** (k + 1)].sum())))
        k += 1
    return EmbeddingReport(on / bn, on, bn, blocks)


class MonotoneTable:
    """Nondecreasing function given by a table, interpolated linearly."""

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        order = np.argsort(x)
        self.x, self.y = x[order], y[order]
        if np.any(np.diff(self.y) < -1e-12):
            raise PreconditionError("table must be nondecreasing")

    @classmethod
    def from_function(cls, fn, x):
        x = np.asarray(x, dtype=float)
        return cls(x, fn(x))

    def __call__(self, t):
        return np.interp(t, self.x, self.y)


@dataclass
class CyclicityReport:
    c1: float
    c2: float
    profile_t: np.ndarray
    profile: np.ndarray
    sweep: list  # (r, ||f/f_r - 1||_w)
    division_degree: int


def cyclicity_diagnostic(
    f: TaylorSeries,
    u,
    v,
    w: Majorant,
    r_list,
    radii=None,
    n_theta: int = DEFAULT_ANGLES,
    division_degree: int | None = None,
) -> CyclicityReport:
    """Constants of the two growth conditions plus the dilation sweep.

    ``c1 = inf |f(z)| / u(1-|z|)`` and ``c2 = sup (1-|z|)|f'(z)| / v(1-|z|)``
    over the grid; ``profile = v/(u w)`` at ``t = 1 - radii``; the sweep lists
    ``||f/f_r - 1||_w`` for ``r`` in ``r_list``.
    """
    if abs(complex(f.coeffs[0])) <= 1e-14:
        raise PreconditionError("f(0) must be nonzero")
    radii = DEFAULT_RADII if radii is None else np.asarray(radii, dtype=float)
    df = series_derivative(f)
    c1, c2 = math.inf, 0.0
    for r in radii:
        t = 1.0 - r
        fv = np.abs(sample_on_circle(f, n_theta, r))
        dv = np.abs(sample_on_circle(df, n_theta, r))
        c1 = min(c1, float(np.min(fv)) / float(u(t)))
        vt = float(v(t))
        if vt > 0:
            c2 = max(c2, float(np.max(t * dv)) / vt)
        elif np.max(t * dv) > 0:
            c2 = math.inf
    t = 1.0 - radii
    profile = np.asarray(v(t), dtype=float) / (np.asarray(u(t), dtype=float) * w(t))
    deg = division_degree or max(4 * f.degree, 64)
    sweep = []
    for r in r_list:
        q = series_divide(f, dilate(f, r), deg) - 1
        sweep.append((float(r), bloch_norm(q, w, radii, n_theta).value))
    return CyclicityReport(c1, c2, t, profile, sweep, deg)
