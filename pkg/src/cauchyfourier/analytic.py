"""Truncated Taylor series, boundary grids and transforms of circle measures.

Angles are in turns throughout: the point ``theta`` on the circle is
``exp(2j*pi*theta)``.  Coefficients follow ``mu_hat(n) = int conj(zeta)**n dmu``
so that the Cauchy transform of ``mu`` is the generating function of
``mu_hat``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapError, DomainError, PreconditionError, SingularityError

__all__ = [
    "TaylorSeries",
    "BoundaryGrid",
    "BoundaryMeasure",
    "DEGREE_CAP",
    "RHO",
    "series_eval",
    "series_derivative",
    "dilate",
    "coeffs_from_boundary",
    "coeffs_from_interior",
    "sample_on_circle",
    "cauchy_transform",
    "measure_fourier_coeff",
    "herglotz",
    "herglotz_series",
    "herglotz_on_circle",
    "conjugate_function",
    "series_divide",
    "toeplitz_conj_apply",
    "is_power_of_two",
]

DEGREE_CAP = 2**14
RHO = 1.0 - 2.0**-12
INTERIOR_M = 2**18
TWO_PI_I = 2j * math.pi


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class TaylorSeries:
    """Holomorphic polynomial ``sum_n coeffs[n] z**n``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @classmethod
    def monomial(cls, n, c=1.0):
        a = np.zeros(n + 1, dtype=complex)
        a[n] = c
        return cls(a)

    @classmethod
    def constant(cls, c):
        return cls([c])

    def __call__(self, z):
        return series_eval(self, z)

    def __add__(self, other):
        if not isinstance(other, TaylorSeries):
            other = TaylorSeries([other])
        n = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(n, dtype=complex)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return TaylorSeries(out)

    __radd__ = __add__

    def __neg__(self):
        return TaylorSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TaylorSeries):
            return TaylorSeries(np.convolve(self.coeffs, other.coeffs))
        return TaylorSeries(self.coeffs * other)

    __rmul__ = __mul__

    def truncate(self, degree):
        out = np.zeros(degree + 1, dtype=complex)
        k = min(degree + 1, len(self.coeffs))
        out[:k] = self.coeffs[:k]
        return TaylorSeries(out)

    def h2_norm(self):
        return float(np.linalg.norm(self.coeffs))

    def to_json(self):
        return json.dumps([[float(c.real), float(c.imag)] for c in self.coeffs])

    @classmethod
    def from_json(cls, text):
        pairs = json.loads(text)
        return cls([complex(re, im) for re, im in pairs])


def series_eval(f: TaylorSeries, z):
    """Horner evaluation at points of the closed disk."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1 + 1e-12):
        raise DomainError("series are evaluated on the closed unit disk")
    acc = np.zeros_like(z)
    for c in f.coeffs[::-1]:
        acc = acc * z + c
    return complex(acc) if acc.ndim == 0 else acc


def series_derivative(f: TaylorSeries) -> TaylorSeries:
    if f.degree == 0:
        return TaylorSeries([0])
    return TaylorSeries(f.coeffs[1:] * np.arange(1, f.degree + 1))


def dilate(f: TaylorSeries, r) -> TaylorSeries:
    """``f_r(z) = f(r z)``."""
    return TaylorSeries(f.coeffs * float(r) ** np.arange(f.degree + 1))


@dataclass(frozen=True, eq=False)
class BoundaryGrid:
    """Samples ``g(exp(2 pi i j / M))`` on a power-of-two uniform grid."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if not is_power_of_two(s.size):
            raise PreconditionError(f"grid size {s.size} is not a power of two")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def M(self):
        return self.samples.size

    @property
    def theta(self):
        return np.arange(self.M) / self.M

    @property
    def zeta(self):
        return np.exp(TWO_PI_I * self.theta)

    @classmethod
    def from_function(cls, fn, M):
        th = np.arange(M) / M
        return cls(np.asarray(fn(th)))


def sample_on_circle(f: TaylorSeries, M: int, r: float = 1.0) -> np.ndarray:
    """Values of ``f`` at ``r * exp(2 pi i j / M)`` by folding and one FFT."""
    c = f.coeffs * (r ** np.arange(f.degree + 1) if r != 1.0 else 1.0)
    pad = (-len(c)) % M
    folded = np.concatenate([c, np.zeros(pad, dtype=complex)]).reshape(-1, M).sum(axis=0)
    return np.fft.ifft(folded) * M


def coeffs_from_boundary(g: BoundaryGrid, degree: int | None = None) -> TaylorSeries:
    """Forward discrete Fourier analysis, keeping indices ``0..degree``."""
    M = g.M
    if degree is None:
        degree = max(M // 4, 1) if M >= 4 else M - 1
    if degree >= M:
        raise PreconditionError(f"degree {degree} needs more than M={M} samples")
    spec = np.fft.fft(np.asarray(g.samples, dtype=complex)) / M
    return TaylorSeries(spec[: degree + 1])


def coeffs_from_interior(values_on_circle, degree, rho=RHO, M=INTERIOR_M):
    """Coefficients from samples on the circle of radius ``rho``.

    ``values_on_circle`` is an array of ``M`` samples (or a callable taking
    the sample points).  The FFT coefficients are rescaled by ``rho**-n``.
    """
    if degree > DEGREE_CAP:
        raise CapError(f"degree {degree} exceeds the cap {DEGREE_CAP}")
    if callable(values_on_circle):
        z = rho * np.exp(TWO_PI_I * np.arange(M) / M)
        vals = values_on_circle(z)
    else:
        vals = np.asarray(values_on_circle)
        M = vals.size
    spec = np.fft.fft(vals) / M
    n = np.arange(degree + 1)
    return TaylorSeries(spec[: degree + 1] * rho ** (-n.astype(float)))


def _as_array(x, dtype):
    return np.atleast_1d(np.asarray(x, dtype=dtype))


@dataclass(frozen=True, eq=False)
class BoundaryMeasure:
    """Atoms plus an optional density sampled on a uniform grid.

    Total mass is ``sum(weights) + mean(density)``.
    """

    thetas: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    density: np.ndarray | None = None

    def __post_init__(self):
        th = _as_array(self.thetas, float) % 1.0
        w = _as_array(self.weights, complex)
        if th.shape != w.shape:
            raise ValueError("thetas and weights must have equal length")
        th.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "weights", w)
        if self.density is not None:
            d = np.array(self.density, dtype=float)
            if not is_power_of_two(d.size):
                raise PreconditionError("density grid size must be a power of two")
            if np.any(d < 0):
                raise PreconditionError("density must be nonnegative")
            d.setflags(write=False)
            object.__setattr__(self, "density", d)

    @classmethod
    def atoms(cls, thetas, weights):
        return cls(thetas, weights)

    @classmethod
    def uniform(cls, M=64, mass=1.0):
        return cls(density=np.full(M, float(mass)))

    @classmethod
    def zero(cls):
        return cls()

    @property
    def has_density(self):
        return self.density is not None

    @property
    def M(self):
        return None if self.density is None else self.density.size

    @property
    def zetas(self):
        return np.exp(TWO_PI_I * self.thetas)

    @property
    def mass(self):
        m = complex(self.weights.sum())
        if self.density is not None:
            m += float(self.density.mean())
        return m.real if abs(m.imag) < 1e-300 else m

    def is_positive(self):
        return bool(np.all(np.abs(self.weights.imag) <= 1e-15) and np.all(self.weights.real >= 0))

    def scaled(self, c):
        d = None if self.density is None else self.density * c
        return BoundaryMeasure(self.thetas, self.weights * c, d)

    def to_dict(self):
        out = {
            "atoms": [[float(t), [float(w.real), float(w.imag)]] for t, w in zip(self.thetas, self.weights)]
        }
        if self.density is not None:
            out["density"] = self.density.tolist()
        return out

    @classmethod
    def from_dict(cls, data):
        atoms = data.get("atoms", [])
        th = [a[0] for a in atoms]
        w = [complex(*a[1]) if isinstance(a[1], (list, tuple)) else complex(a[1]) for a in atoms]
        return cls(th, w, data.get("density"))


def _check_inside(z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("point must lie in the open unit disk")
    return z


def _density_points(mu):
    M = mu.M
    return np.exp(TWO_PI_I * np.arange(M) / M), mu.density / M


def cauchy_transform(mu: BoundaryMeasure, z):
    """``int dmu(zeta) / (1 - conj(zeta) z)`` with exact atoms and trapezoid density."""
    z = _check_inside(z)
    zz = np.atleast_1d(z)
    zs = mu.zetas
    out = (mu.weights[None, :] / (1 - np.conj(zs)[None, :] * zz[:, None])).sum(axis=1)
    if mu.has_density:
        pts, q = _density_points(mu)
        out = out + (q[None, :] / (1 - np.conj(pts)[None, :] * zz[:, None])).sum(axis=1)
    return complex(out[0]) if z.ndim == 0 else out.reshape(z.shape)


def measure_fourier_coeff(mu: BoundaryMeasure, n):
    """``mu_hat(n) = int conj(zeta)**n dmu`` for integer ``n >= 0``."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise DomainError("coefficient index must be nonnegative")
    nn = np.atleast_1d(n_arr).astype(np.int64)
    # reduce the phase in exact turns before exponentiating
    phase = np.outer(nn, mu.thetas) % 1.0 if mu.thetas.size else np.zeros((nn.size, 0))
    out = (mu.weights[None, :] * np.exp(-TWO_PI_I * phase)).sum(axis=1)
    if mu.has_density:
        M = mu.M
        spec = np.fft.fft(mu.density) / M
        out = out + spec[nn % M]
    return complex(out[0]) if n_arr.ndim == 0 else out


def herglotz(mu: BoundaryMeasure, z):
    """``int (zeta + z)/(zeta - z) dmu(zeta)`` at points of the open disk."""
    z = _check_inside(z)
    zz = np.atleast_1d(z)
    zs = mu.zetas
    if zs.size:
        gap = np.abs(zs[None, :] - zz[:, None])
        if np.any(gap < 1e-15):
            raise SingularityError("evaluation point coincides with an atom")
    out = (mu.weights[None, :] * (zs[None, :] + zz[:, None]) / (zs[None, :] - zz[:, None])).sum(axis=1)
    if mu.has_density:
        pts, q = _density_points(mu)
        out = out + (q[None, :] * (pts[None, :] + zz[:, None]) / (pts[None, :] - zz[:, None])).sum(axis=1)
    return complex(out[0]) if z.ndim == 0 else out.reshape(z.shape)


def _bandlimited_density_coeffs(mu, degree):
    """Density coefficients read as a trigonometric polynomial of degree < M/2."""
    M = mu.M
    spec = np.fft.fft(mu.density) / M
    out = np.zeros(degree + 1, dtype=complex)
    k = min(degree + 1, M // 2)
    out[:k] = spec[:k]
    if degree >= M // 2:
        out[M // 2] = spec[M // 2] / 2
    return out


def herglotz_series(mu: BoundaryMeasure, degree: int) -> TaylorSeries:
    """Taylor coefficients ``mass, 2 mu_hat(1), 2 mu_hat(2), ...``.

    The density part is taken band-limited: its coefficients vanish from
    ``M/2`` on, which is exact for trigonometric-polynomial densities such as
    Riesz products whose spectrum fits in the grid.
    """
    n = np.arange(degree + 1)
    c = np.zeros(degree + 1, dtype=complex)
    if mu.thetas.size:
        c += measure_fourier_coeff(BoundaryMeasure(mu.thetas, mu.weights), n)
    if mu.has_density:
        c += _bandlimited_density_coeffs(mu, degree)
    c[1:] *= 2
    return TaylorSeries(c)


def herglotz_on_circle(mu: BoundaryMeasure, M: int = INTERIOR_M, rho: float = RHO) -> np.ndarray:
    """Herglotz integral on the circle of radius ``rho`` (atoms in closed form)."""
    z = rho * np.exp(TWO_PI_I * np.arange(M) / M)
    out = np.zeros(M, dtype=complex)
    for th, w in zip(mu.thetas, mu.weights):
        zeta = np.exp(TWO_PI_I * th)
        out += w * (zeta + z) / (zeta - z)
    if mu.has_density:
        if mu.M > M:
            raise PreconditionError("sampling grid coarser than the density grid")
        dens = _bandlimited_density_coeffs(mu, mu.M // 2)
        dens[1:] *= 2
        out += sample_on_circle(TaylorSeries(dens), M, rho)
    return out


def conjugate_function(g: BoundaryGrid) -> BoundaryGrid:
    """Harmonic conjugate via the multiplier ``-i sgn(n)`` (mean and Nyquist dropped)."""
    s = np.asarray(g.samples)
    if np.iscomplexobj(s):
        if np.any(np.abs(s.imag) > 1e-12 * (1 + np.abs(s.real).max())):
            raise PreconditionError("conjugate_function expects real samples")
        s = s.real
    M = g.M
    spec = np.fft.fft(s)
    k = np.fft.fftfreq(M, 1.0 / M)
    mult = -1j * np.sign(k)
    if M % 2 == 0:
        mult[M // 2] = 0
    return BoundaryGrid(np.fft.ifft(spec * mult).real)


def series_divide(f: TaylorSeries, g: TaylorSeries, degree: int) -> TaylorSeries:
    """Power-series quotient ``f / g`` truncated at ``degree``."""
    g0 = g.coeffs[0]
    if abs(g0) <= 1e-14:
        raise SingularityError("divisor vanishes at the origin")
    fc = f.truncate(degree).coeffs
    gc = g.truncate(degree).coeffs
    h = np.zeros(degree + 1, dtype=complex)
    for n in range(degree + 1):
        acc = fc[n]
        if n:
            acc -= np.dot(h[:n], gc[n:0:-1])
        h[n] = acc / g0
    return TaylorSeries(h)


def toeplitz_conj_apply(b: TaylorSeries, f: TaylorSeries) -> TaylorSeries:
    """Coefficients ``h(n) = sum_k conj(b_k) f_{n+k}`` for ``n = 0..deg f``."""
    fc = f.coeffs
    n = len(fc)
    h = np.zeros(n, dtype=complex)
    for k, bk in enumerate(b.coeffs[:n]):
        if bk != 0:
            h[: n - k] += np.conj(bk) * fc[k:]
    return TaylorSeries(h)
