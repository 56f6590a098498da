"""Model spaces of finite Blaschke products and two finite-rank duality checks."""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .analytic import (
    BoundaryGrid,
    TaylorSeries,
    sample_on_circle,
    series_divide,
    toeplitz_conj_apply,
)
from .errors import AccuracyWarning, PreconditionError, ResourceError
from .innerouter import outer_from_log_modulus
from .orlicz import YoungFunction, conjugate, normalized_orlicz_norm
from .saconstruct import ArcSet, LiftedSeries

__all__ = [
    "FiniteBlaschke",
    "DualcycReport",
    "DbrReport",
    "model_space_basis",
    "model_space_residual",
    "dualcyc_gap",
    "dbr_pairing_demo",
    "smoothed_indicator",
]


@dataclass(frozen=True, eq=False)
class FiniteBlaschke:
    """``prod_j (|a_j|/a_j) (a_j - z)/(1 - conj(a_j) z)``, with factor ``z`` for ``a_j = 0``."""

    zeros: tuple

    def __post_init__(self):
        zs = tuple(complex(a) for a in self.zeros)
        if any(abs(a) >= 1 for a in zs):
            raise PreconditionError("Blaschke zeros must lie in the open disk")
        object.__setattr__(self, "zeros", zs)

    @property
    def d(self):
        return len(self.zeros)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for a in self.zeros:
            if a == 0:
                out = out * z
            else:
                out = out * (abs(a) / a) * (a - z) / (1 - np.conj(a) * z)
        return out

    def series(self, degree) -> TaylorSeries:
        out = np.zeros(degree + 1, dtype=complex)
        out[0] = 1
        n = np.arange(degree + 1)
        for a in self.zeros:
            if a == 0:
                fac = np.zeros(degree + 1, dtype=complex)
                if degree >= 1:
                    fac[1] = 1
            else:
                geo = np.conj(a) ** n
                fac = a * geo
                fac[1:] -= geo[:-1]
                fac *= abs(a) / a
            out = np.convolve(out, fac)[: degree + 1]
        return TaylorSeries(out)

    def boundary_defect(self, M=1024):
        z = np.exp(2j * math.pi * np.arange(M) / M)
        return float(np.max(np.abs(np.abs(self(z)) - 1)))


def _kernel_columns(theta: FiniteBlaschke, degree):
    n = np.arange(degree + 1)
    cols = []
    for a, mult in Counter(theta.zeros).items():
        if mult > 3:
            raise PreconditionError("zeros of multiplicity above 3 are not supported")
        ca = np.conj(a)
        for s in range(mult):
            # s-th derivative in conj(a) of sum (conj(a) z)**n
            fall = np.ones(degree + 1)
            for r in range(s):
                fall = fall * (n - r)
            with np.errstate(invalid="ignore", divide="ignore"):
                power = np.where(n >= s, ca ** np.maximum(n - s, 0), 0)
            cols.append(fall * power)
    return np.array(cols, dtype=complex).T


def model_space_basis(theta: FiniteBlaschke, degree: int):
    """Orthonormal coefficient vectors spanning the model space of ``theta``."""
    if degree < theta.d:
        raise PreconditionError("degree must be at least the number of zeros")
    A = _kernel_columns(theta, degree)
    Q, R = np.linalg.qr(A)
    if np.min(np.abs(np.diag(R))) < 1e-12:
        raise PreconditionError("kernels are numerically dependent; increase the degree")
    return [TaylorSeries(Q[:, i]) for i in range(Q.shape[1])]


def model_space_residual(theta: FiniteBlaschke, basis, degree=None) -> float:
    """``max |<e, theta z^k>|`` over basis elements and ``k = 0..degree-d``."""
    degree = degree or basis[0].degree
    T = theta.series(degree).coeffs
    worst = 0.0
    for e in basis:
        ec = e.truncate(degree).coeffs
        for k in range(degree - theta.d + 1):
            shifted = np.zeros(degree + 1, dtype=complex)
            shifted[k:] = T[: degree + 1 - k]
            worst = max(worst, abs(np.vdot(shifted, ec)))
    return worst


@dataclass
class DualcycReport:
    dist: float
    min_norm: float
    restarts: int
    converged: bool
    sweeps: int
    seed: int
    trunc_N: int
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "dist": self.dist,
            "min_norm": self.min_norm,
            "restarts": self.restarts,
            "converged": self.converged,
            "sweeps": self.sweeps,
            "seed": self.seed,
            "trunc_N": self.trunc_N,
        }


def _toeplitz_matrix(T, N, q_len):
    # column j holds the coefficients of theta * z**j up to index N
    mat = np.zeros((N + 1, q_len), dtype=complex)
    for j in range(q_len):
        mat[j:, j] = T[: N + 1 - j]
    return mat


def dualcyc_gap(
    theta: FiniteBlaschke,
    phi: YoungFunction,
    trunc_N: int,
    restarts: int = 20,
    seed: int = 0,
    tol: float = 1e-8,
    max_sweeps: int = 200,
) -> DualcycReport:
    """Distance from 1 to ``theta * polynomials`` in the conjugate Orlicz norm,
    and the least Orlicz norm on the unit sphere of the model space.

    Norms are normalized so that ``e_0`` has norm one.  The distance is
    minimized by coordinate descent over real and imaginary parts of the
    coefficients of ``Q`` (``deg Q <= trunc_N - d``), started from the
    least-squares solution.  The model-space side minimizes
    ``||v||_phi / ||v||_2`` over the span of the orthonormal basis with
    seeded random restarts.
    """
    d = theta.d
    if trunc_N < 4 * d:
        raise PreconditionError("trunc_N must be at least 4 times the number of zeros")
    conj_phi = conjugate(phi)
    N = trunc_N
    q_len = N - d + 1
    T = theta.series(N).coeffs
    A = _toeplitz_matrix(T, N, q_len)
    e0 = np.zeros(N + 1, dtype=complex)
    e0[0] = 1

    def objective(x):
        q = x[:q_len] + 1j * x[q_len:]
        return normalized_orlicz_norm(e0 - A @ q, conj_phi)

    q0, *_ = np.linalg.lstsq(A, e0, rcond=None)
    x = np.concatenate([q0.real, q0.imag])
    best = objective(x)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        start = best
        for i in range(x.size):
            xi = x[i]

            def line(t, i=i):
                x[i] = t
                return objective(x)

            res = minimize_scalar(line, bracket=(xi - 0.1, xi + 0.1), options={"xtol": 1e-10})
            if res.fun < best:
                x[i] = res.x
                best = res.fun
            else:
                x[i] = xi
        if start - best <= tol * max(1.0, best):
            converged = True
            break
    dist = float(best)

    basis = model_space_basis(theta, N)
    B = np.array([e.coeffs for e in basis]).T
    rng = np.random.default_rng(seed)

    def ratio(y):
        c = y[:d] + 1j * y[d:]
        nc = np.linalg.norm(c)
        if nc == 0:
            return math.inf
        return normalized_orlicz_norm(B @ (c / nc), phi)

    best_min = math.inf
    for _ in range(restarts):
        y0 = rng.standard_normal(2 * d)
        res = minimize(ratio, y0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        best_min = min(best_min, float(res.fun))
    return DualcycReport(dist, best_min, restarts, converged, sweeps, seed, trunc_N)


def _step_integral(y, w):
    """Antiderivative of the raised-cosine step ``(1 + sin(pi y / w)) / 2``
    (0 below ``-w/2``, 1 above ``w/2``), normalized to vanish on the left."""
    mid = 0.5 * (y + w / 2) - (w / (2 * math.pi)) * np.cos(math.pi * y / w)
    return np.where(y < -w / 2, 0.0, np.where(y > w / 2, y, mid))


def smoothed_indicator(K: ArcSet, M: int, collar_cells: int = 4, oversample: int = 1) -> np.ndarray:
    """Cell averages of the indicator of ``K`` with raised-cosine edges.

    Each edge ramp is ``collar_cells / M`` turns wide and centred on the
    endpoint.  Values are exact averages over the cells of a grid with
    ``oversample * M`` points, so their mean is ``m(K)`` up to rounding.
    """
    w = collar_cells / M
    for s, e in K.arcs:
        if e - s < 3 * w and (s, e) != (0, 1):
            raise ResourceError("an arc of K is shorter than three collars; increase M")
    wraps = bool(K.arcs) and K.arcs[0][0] == 0 and K.arcs[-1][1] == 1
    for s, e in K.complement().arcs:
        if e - s < 3 * w and not (wraps and (s == 0 or e == 1)):
            raise ResourceError("a gap of K is shorter than three collars; increase M")
    n = M * oversample
    h = 1.0 / n
    th = np.arange(n) * h
    out = np.zeros(n)
    for s, e in _joined_arcs(K):
        if e - s >= 1:
            return np.ones(n)
        c, half = (s + e) / 2, (e - s) / 2
        u = (th - c + 0.5) % 1.0 - 0.5
        lo, hi = u + half, u - half
        out += (
            _step_integral(lo + h / 2, w)
            - _step_integral(lo - h / 2, w)
            - _step_integral(hi + h / 2, w)
            + _step_integral(hi - h / 2, w)
        ) / h
    return np.clip(out, 0.0, 1.0)


def _joined_arcs(K: ArcSet):
    """Arcs as float pairs, with a piece ending at 1 glued to one starting at 0."""
    arcs = [(float(a), float(b)) for a, b in K.arcs]
    if len(arcs) > 1 and arcs[0][0] == 0 and arcs[-1][1] == 1:
        first, last = arcs[0], arcs[-1]
        arcs = [(last[0], 1 + first[1])] + arcs[1:-1]
    return arcs


@dataclass
class DbrReport:
    M: int
    trunc: int
    K_measure: float
    b0: complex
    b0_expected: float
    modulus_defect: float
    toeplitz_residual: float
    nu_K: float
    pairings: list  # (n, l1w, P_n, |P_n - nu_K|)
    notes: list = field(default_factory=list)


def dbr_pairing_demo(K: ArcSet, f_seq, trunc: int = 256, M: int = 2**16, l1w=None, collar_margin: int = 4) -> DbrReport:
    """Outer ``b`` with ``log|b| = -1_K`` (smoothed) and its pairing chain.

    ``f_seq`` holds stage polynomials (dense series or lifts); ``l1w`` their
    weighted norms for the report.  The test function is the Cauchy
    transform ``g`` of ``(1 - |b|**2) 1_K dm``; the report lists the modulus
    defect of ``1 - |b|**2`` away from the collars, the Toeplitz round trip
    ``T_conj(b) T_conj(1/b) g - g``, and the pairings
    ``P_n = int conj(f_n) (1 - |b|**2) 1_K dm`` next to ``nu(K) = (1 - e**-2) m(K)``.
    """
    if not f_seq:
        raise PreconditionError("f_seq must be nonempty")
    # the outer synthesis runs on a 4x finer grid so that its degree (M)
    # resolves the 4-cell ramps; everything else lives on the M-grid
    fine = smoothed_indicator(K, M, oversample=4)
    ind = fine[::4]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AccuracyWarning)
        b = outer_from_log_modulus(BoundaryGrid(-fine), M)
    mK = float(K.measure)
    bv = sample_on_circle(b, 4 * M)[::4]
    th = np.arange(M) / M
    far = _edge_distance(K, th) >= collar_margin / M
    inside = far & (ind > 0.5)
    outside = far & (ind <= 0.5)
    one_minus = 1 - np.abs(bv) ** 2
    defect = max(
        float(np.max(np.abs(one_minus[inside] - (1 - math.exp(-2))))) if inside.any() else 0.0,
        float(np.max(np.abs(one_minus[outside]))) if outside.any() else 0.0,
    )
    dens = one_minus * ind
    g = TaylorSeries((np.fft.fft(dens) / M)[: trunc + 1])
    inv_b = series_divide(TaylorSeries([1.0]), b.truncate(2 * trunc), 2 * trunc)
    g_long = TaylorSeries((np.fft.fft(dens) / M)[: 2 * trunc + 1])
    inner = toeplitz_conj_apply(inv_b, g_long)
    back = toeplitz_conj_apply(b.truncate(2 * trunc), inner)
    resid = float(np.max(np.abs(back.coeffs[: trunc + 1] - g.coeffs)))
    nu = (1 - math.exp(-2)) * mK
    pairings = []
    for n, f in enumerate(f_seq, start=1):
        if isinstance(f, LiftedSeries):
            xs = (f.m * np.arange(M)) % M / M
            vals = f.F(np.exp(2j * math.pi * xs))
        else:
            vals = sample_on_circle(f, M)
        P = complex(np.mean(np.conj(vals) * dens))
        norm = None if l1w is None else float(l1w[n - 1])
        pairings.append((n, norm, P, abs(P - nu)))
    return DbrReport(
        M=M,
        trunc=trunc,
        K_measure=mK,
        b0=complex(b.coeffs[0]),
        b0_expected=math.exp(-mK),
        modulus_defect=defect,
        toeplitz_residual=resid,
        nu_K=nu,
        pairings=pairings,
        notes=["truncated model: no extremality claim is made"] + [str(c.message) for c in caught],
    )


def _edge_distance(K: ArcSet, th):
    """Periodic distance from each point of ``th`` to the nearest endpoint of ``K``."""
    arcs = [(float(a), float(b)) for a, b in K.arcs]
    wraps = bool(arcs) and arcs[0][0] == 0 and arcs[-1][1] == 1
    edges = []
    for a, b in arcs:
        if not (wraps and a == 0):
            edges.append(a)
        if not (wraps and b == 1):
            edges.append(b)
    if not edges or arcs == [(0.0, 1.0)]:
        return np.full(th.shape, np.inf)
    edges = np.sort(np.array(edges) % 1.0)
    ext = np.concatenate([edges - 1, edges, edges + 1])
    pos = np.searchsorted(ext, th)
    return np.minimum(np.abs(th - ext[pos - 1]), np.abs(ext[np.minimum(pos, ext.size - 1)] - th))
