"""Outer and singular inner functions, Clark pairs, and Riesz-product measures."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analytic import (
    DEGREE_CAP,
    INTERIOR_M,
    RHO,
    TWO_PI_I,
    BoundaryGrid,
    BoundaryMeasure,
    TaylorSeries,
    coeffs_from_boundary,
    coeffs_from_interior,
    conjugate_function,
    herglotz_on_circle,
    herglotz_series,
    is_power_of_two,
    sample_on_circle,
    series_derivative,
)
from .errors import AccuracyWarning, DomainError, PreconditionError, SingularityError
from .majorants import Majorant, square_dini_partial

__all__ = [
    "ClarkPair",
    "RieszProductSpec",
    "RieszDiagnostics",
    "CyclicDiagnostics",
    "outer_from_log_modulus",
    "singular_inner",
    "clark_b_from_mu",
    "kernel_identity_residual",
    "riesz_product_measure",
    "cyclic_inner_candidate",
    "default_alpha",
    "bloch_test_grid",
]


def outer_from_log_modulus(psi: BoundaryGrid, degree: int | None = None) -> TaylorSeries:
    """Outer function with boundary modulus ``exp(psi)`` on the grid.

    Boundary values ``exp(psi + i conj(psi))`` are analysed by FFT.  If the
    spectrum of ``psi`` has not dropped below ``1e-12`` (relative) by
    frequency ``M/4`` an :class:`AccuracyWarning` is issued.
    """
    s = np.asarray(psi.samples)
    if np.iscomplexobj(s):
        s = s.real
    M = psi.M
    spec = np.abs(np.fft.rfft(s)) / M
    scale = max(1.0, float(np.max(np.abs(s))))
    if M >= 8 and spec[M // 4 :].max(initial=0.0) > 1e-12 * scale:
        warnings.warn(
            f"log-modulus spectrum above 1e-12 past M/4 (M={M}); outer function may be inaccurate",
            AccuracyWarning,
            stacklevel=2,
        )
    tilde = conjugate_function(BoundaryGrid(s)).samples
    G = np.exp(s + 1j * tilde)
    return coeffs_from_boundary(BoundaryGrid(G), degree)


def singular_inner(mu: BoundaryMeasure, degree: int) -> TaylorSeries:
    """``S_mu = exp(-H_mu)`` from samples on the circle of radius ``RHO``."""
    if not mu.is_positive() or (mu.has_density and np.any(mu.density < 0)):
        raise PreconditionError("singular_inner needs a positive measure")
    if mu.thetas.size == 0 and not mu.has_density:
        return TaylorSeries([1.0])
    H = herglotz_on_circle(mu, INTERIOR_M, RHO)
    return coeffs_from_interior(np.exp(-H), degree, RHO)


@dataclass(frozen=True, eq=False)
class ClarkPair:
    mu: BoundaryMeasure
    alpha: float
    b: TaylorSeries


def bloch_test_grid(r_max=0.95, n_r=20, n_theta=64):
    r = np.linspace(0.0, r_max, n_r)
    th = np.arange(n_theta) / n_theta
    return (r[:, None] * np.exp(TWO_PI_I * th[None, :])).ravel()


def clark_b_from_mu(mu: BoundaryMeasure, alpha: float = 0.0, degree: int = 1024) -> ClarkPair:
    """Self-map ``b`` with ``(1 + b)/(1 - b) = H_mu + i alpha``."""
    if not mu.is_positive():
        raise PreconditionError("Clark measures must be positive")
    if not (mu.mass > 0):
        raise PreconditionError("Clark measure must have positive mass")
    Hc = herglotz_on_circle(mu, INTERIOR_M, RHO) + 1j * alpha
    denom = Hc + 1
    assert np.all(np.abs(denom) > 0), "H + 1 + i alpha vanished for a positive measure"
    b = coeffs_from_interior((Hc - 1) / denom, degree, RHO)
    z = bloch_test_grid()
    bz = b(z)
    if not np.all(np.abs(bz) < 1):
        raise PreconditionError("computed b is not a self-map on the test grid; raise the degree")
    return ClarkPair(mu, float(alpha), b)


def kernel_identity_residual(pair: ClarkPair, lam, z):
    """Residual of the de Branges-Rovnyak kernel identity at ``(lam, z)``.

    Left side: ``K(kappa_lam dmu)(z) / K(dmu)(z)`` by exact finite sums, with
    ``kappa_lam(zeta) = 1/(1 - conj(lam) zeta)``.  Right side, written only in
    terms of ``b``, the mass ``c`` and the phase ``alpha``::

        2 (1 - conj(b(lam)) b(z))
        ---------------------------------------------------------------
        (1 - conj(b(lam))) (1 - conj(lam) z) ((1 + b(z)) + (c - i alpha)(1 - b(z)))

    For a probability measure and ``alpha = 0`` this is the reproducing
    kernel of H(b) divided by ``1 - conj(b(lam))``.
    """
    lam = np.asarray(lam, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(lam) > 0.9 + 1e-12) or np.any(np.abs(z) > 0.9 + 1e-12):
        raise DomainError("kernel identity is checked for |lam|, |z| <= 0.9")
    lam, z = np.broadcast_arrays(lam, z)
    mu = pair.mu
    pts = [mu.zetas]
    wts = [mu.weights]
    if mu.has_density:
        M = mu.M
        pts.append(np.exp(TWO_PI_I * np.arange(M) / M))
        wts.append(mu.density / M)
    zeta = np.concatenate(pts)
    wt = np.concatenate(wts)
    lf, zf = lam.ravel(), z.ravel()
    cauchy = 1.0 / (1 - np.conj(zeta)[None, :] * zf[:, None])
    kap = 1.0 / (1 - np.conj(lf)[:, None] * zeta[None, :])
    K0 = (wt[None, :] * cauchy).sum(axis=1)
    K1 = (wt[None, :] * kap * cauchy).sum(axis=1)
    if np.any(np.abs(K0) < 1e-300):
        raise SingularityError("Cauchy transform of mu vanished")
    lhs = K1 / K0
    bl = pair.b(lf)
    bz = pair.b(zf)
    c = complex(mu.mass)
    rhs = 2 * (1 - np.conj(bl) * bz) / (
        (1 - np.conj(bl)) * (1 - np.conj(lf) * zf) * ((1 + bz) + (c - 1j * pair.alpha) * (1 - bz))
    )
    res = np.abs(lhs - rhs).reshape(lam.shape)
    return float(res) if res.ndim == 0 else res


def default_alpha(t):
    """Slowly increasing profile ``log log(e**2 + 1/t)``."""
    t = np.asarray(t, dtype=float)
    return np.log(np.log(math.e**2 + 1.0 / t))


@dataclass
class RieszProductSpec:
    frequencies: list
    amplitudes: list
    M: int
    alpha: Callable | None = None
    beta: Callable | None = None

    def __post_init__(self):
        f = [int(n) for n in self.frequencies]
        a = [float(x) for x in self.amplitudes]
        if len(f) != len(a):
            raise ValueError("frequencies and amplitudes must have equal length")
        if any(n < 1 for n in f):
            raise PreconditionError("frequencies must be positive")
        if any(f[k + 1] < 3 * f[k] for k in range(len(f) - 1)):
            raise PreconditionError("frequencies must satisfy n_{k+1} >= 3 n_k")
        if any(not (-1 < x < 1) for x in a):
            raise PreconditionError("amplitudes must lie in (-1, 1)")
        if not is_power_of_two(self.M):
            raise PreconditionError("grid M must be a power of two")
        if self.M < 2 * sum(f) + 1:
            raise PreconditionError(f"M={self.M} cannot resolve the product (needs > {2 * sum(f)})")
        self.frequencies, self.amplitudes = f, a

    @property
    def depth(self):
        return len(self.frequencies)


@dataclass
class RieszDiagnostics:
    mass: float
    rows: list = field(default_factory=list)  # (j, k, ratio1, ratio2)
    max_ratio1: float = 0.0
    max_ratio2: float = 0.0
    reference1: float = 8.0
    reference2: float = 36.0

    def summary(self):
        return {"mass": self.mass, "max_ratio1": self.max_ratio1, "max_ratio2": self.max_ratio2}


def riesz_product_measure(spec: RieszProductSpec):
    """Density ``prod_k (1 + a_k cos(2 pi n_k theta))`` and dyadic-arc diagnostics.

    Arc masses are cell sums on the grid.  For every dyadic arc ``I`` of
    length ``2**-j`` (``j <= log2 M - 2``) the rows hold
    ``mu(I) / (|I| alpha(|I|))`` and ``|mu(I) - mu(I')| / (|I| beta(|I|))`` with
    ``I'`` the next arc.  Missing profiles default to ``alpha`` above and
    ``beta = 1``.
    """
    M = spec.M
    th = np.arange(M) / M
    d = np.ones(M)
    for n, a in zip(spec.frequencies, spec.amplitudes):
        d *= 1 + a * np.cos(2 * np.pi * n * th)
    mu = BoundaryMeasure(density=d)
    alpha = spec.alpha or default_alpha
    beta = spec.beta or (lambda t: np.ones_like(np.asarray(t, dtype=float)))
    cum = np.concatenate([[0.0], np.cumsum(d)]) / M
    diag = RieszDiagnostics(mass=float(cum[-1]))
    J = int(math.log2(M)) - 2
    for j in range(J + 1):
        n_arcs = 2**j
        step = M // n_arcs
        masses = cum[step::step] - cum[:-1:step]
        length = 1.0 / n_arcs
        r1 = masses / (length * float(alpha(length)))
        r2 = np.abs(masses - np.roll(masses, -1)) / (length * float(beta(length)))
        for k in range(n_arcs):
            diag.rows.append((j, k, float(r1[k]), float(r2[k])))
        diag.max_ratio1 = max(diag.max_ratio1, float(r1.max()))
        diag.max_ratio2 = max(diag.max_ratio2, float(r2.max()))
    return mu, diag


@dataclass
class CyclicDiagnostics:
    c1: float
    c2: float
    lower_ratio: float
    upper_ratio: float
    dini_exponent: float
    riesz: RieszDiagnostics
    spec: RieszProductSpec
    radii: np.ndarray
    n_theta: int


def _grid_radii(jmax=12):
    return 1.0 - 2.0 ** -np.arange(0, jmax + 1, dtype=float)


def cyclic_inner_candidate(w: Majorant, c1: float = 1.0, depth: int = 6, degree: int = 2**12, n_theta: int = 256):
    """Riesz-product singular inner candidate with measured cyclicity diagnostics.

    ``alpha(t) = log log(e**2 + 1/t)`` and ``beta = w exp(-c1 alpha)``.  The
    product uses frequencies ``3**k`` and amplitudes ``beta(3**-k)`` clipped to
    ``[0.05, 0.95]``.  On the grid of radii ``1 - 2**-j`` the diagnostics are
    ``inf |S| / exp(-c1 alpha(1-|z|))`` and ``sup (1-|z|)|S'| / beta(1-|z|)``,
    evaluated from ``H`` and ``H'`` exactly.
    """
    if degree > DEGREE_CAP:
        raise PreconditionError(f"degree {degree} exceeds the cap {DEGREE_CAP}")
    table = square_dini_partial(w, w.K)
    if not table.diverges:
        raise PreconditionError(
            f"square Dini condition holds at desk scale (growth exponent {table.growth_exponent:.3g}); "
            "no cyclic singular inner function is expected"
        )

    def beta(t):
        return w(t) * np.exp(-c1 * default_alpha(t))

    freqs = [3**k for k in range(1, depth + 1)]
    amps = [float(np.clip(beta(1.0 / n), 0.05, 0.95)) for n in freqs]
    M = 1 << max(3, int(math.ceil(math.log2(2 * sum(freqs) + 2))))
    spec = RieszProductSpec(freqs, amps, M, alpha=default_alpha, beta=beta)
    mu, rdiag = riesz_product_measure(spec)
    S = singular_inner(mu, degree)

    H = herglotz_series(mu, M // 2)
    dH = series_derivative(H)
    radii = _grid_radii()
    lower, upper = math.inf, 0.0
    for r in radii:
        Hv = sample_on_circle(H, n_theta, r)
        dHv = sample_on_circle(dH, n_theta, r)
        t = 1.0 - r
        absS = np.exp(-Hv.real)
        lower = min(lower, float(np.min(absS / np.exp(-c1 * default_alpha(t)))))
        upper = max(upper, float(np.max(t * np.abs(dHv) * absS / beta(t))))
    diag = CyclicDiagnostics(
        c1=c1,
        c2=upper,
        lower_ratio=lower,
        upper_ratio=upper,
        dini_exponent=table.growth_exponent,
        riesz=rdiag,
        spec=spec,
        radii=radii,
        n_theta=n_theta,
    )
    return S, diag
