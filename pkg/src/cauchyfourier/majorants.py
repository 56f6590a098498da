"""Majorants on (0, 1], the square Dini condition, and a construction of a
majorant adapted to a Young function.

A :class:`Majorant` is stored by its dyadic node values ``w_k = w(2**-k)``
for ``k = 0..K``.  Nodes are indexed rather than keyed by ``t`` because the
adapted construction produces tens of thousands of nodes and ``2**-k``
underflows long before that.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyWarning, ConstructionError, PreconditionError
from .orlicz import YoungFunction

__all__ = [
    "Majorant",
    "DiniTable",
    "MajorantTrace",
    "RegularityReport",
    "square_dini_partial",
    "construct_majorant",
    "majorant_regularity_check",
    "psi_node_series",
]

LN2 = math.log(2.0)
BLOCK_CAP = 10**6
GAMMA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))


@dataclass(frozen=True, eq=False)
class Majorant:
    """Piecewise-linear positive nondecreasing function with dyadic nodes."""

    values: np.ndarray
    gamma_candidate: float = 0.5
    c_ratio: float = field(init=False, default=math.nan)

    def __post_init__(self):
        w = np.asarray(self.values, dtype=float).ravel()
        if w.size < 2:
            raise ValueError("a majorant needs at least two nodes")
        if not np.all(w > 0) or not np.all(np.isfinite(w)):
            raise PreconditionError("majorant node values must be positive and finite")
        if np.any(w[1:] > w[:-1] * (1 + 1e-12)):
            raise PreconditionError("majorant must be nondecreasing in t")
        w.setflags(write=False)
        object.__setattr__(self, "values", w)
        object.__setattr__(self, "c_ratio", float(np.max(w[:-1] / w[1:])))

    @property
    def K(self):
        return len(self.values) - 1

    @classmethod
    def from_function(cls, fn, K, gamma_candidate=0.5):
        ks = np.arange(K + 1)
        return cls(np.array([fn(2.0 ** -int(k)) for k in ks], dtype=float), gamma_candidate)

    @classmethod
    def power(cls, a, K=40):
        """``t**a`` sampled at the nodes (``a = 0`` is the constant 1)."""
        return cls(2.0 ** (-a * np.arange(K + 1, dtype=float)), gamma_candidate=a if 0 < a < 1 else 0.5)

    @classmethod
    def constant(cls, c=1.0, K=40):
        return cls(np.full(K + 1, float(c)), gamma_candidate=0.5)

    def node_t(self):
        return np.ldexp(1.0, -np.arange(self.K + 1))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t <= 0):
            raise ValueError("majorants are evaluated on (0, 1]")
        w = self.values
        K = self.K
        out = np.empty_like(t)
        top = t >= 1.0
        out[top] = w[0]
        s = -np.log2(np.where(top, 0.5, t))
        k = np.floor(s).astype(np.int64)
        inner = ~top & (k < K)
        if np.any(inner):
            ki = k[inner]
            tk = np.ldexp(1.0, -ki)
            frac = (t[inner] - tk / 2) / (tk / 2)
            out[inner] = w[ki + 1] + (w[ki] - w[ki + 1]) * frac
        below = ~top & (k >= K)
        if np.any(below):
            tK = math.ldexp(1.0, -K)
            slope = (w[K - 1] - w[K]) / (2 * tK - tK)
            line = w[K] + slope * (t[below] - tK)
            ray = w[K] * t[below] / tK
            out[below] = np.maximum(line, ray)
        return float(out[0]) if scalar else out

    def to_dict(self, max_nodes=None):
        w = self.values if max_nodes is None else self.values[:max_nodes]
        nodes = [[math.ldexp(1.0, -k), float(v)] for k, v in enumerate(w)]
        return {"nodes": nodes, "gamma_candidate": self.gamma_candidate, "c_ratio": self.c_ratio}

    @classmethod
    def from_dict(cls, data):
        nodes = np.asarray(data["nodes"], dtype=float)
        return cls(nodes[:, 1], float(data.get("gamma_candidate", 0.5)))


@dataclass
class DiniTable:
    N: np.ndarray
    S: np.ndarray
    growth_exponent: float
    diverges: bool


def square_dini_partial(w: Majorant, n_max: int) -> DiniTable:
    """Partial sums ``S_N = sum_{1 <= n <= N} w(2**-n)**2``.

    The divergence proxy is the least-squares exponent ``e`` in
    ``S_N ~ (log N)**e`` over ``sqrt(n_max) <= N <= n_max``: about 1 for a
    harmonic series, about 0 once the series has converged.
    """
    if n_max > w.K:
        raise PreconditionError(f"n_max={n_max} exceeds the number of nodes K={w.K}")
    if n_max < 1:
        raise ValueError("n_max must be positive")
    N = np.arange(1, n_max + 1)
    S = np.cumsum(w.values[1 : n_max + 1] ** 2)
    lo = max(3, int(math.isqrt(n_max)))
    sel = N >= lo
    if sel.sum() >= 2 and np.all(S[sel] > 0):
        x = np.log(np.log(N[sel]))
        y = np.log(S[sel])
        exponent = float(np.polyfit(x, y, 1)[0])
    else:
        exponent = math.nan
    return DiniTable(N, S, exponent, bool(exponent > 0.5))


@dataclass
class MajorantTrace:
    t: np.ndarray
    N: np.ndarray
    block_sums: np.ndarray
    block_alpha_sums: np.ndarray
    sequence: np.ndarray
    inserted: int
    c_sum: float
    warnings: list = field(default_factory=list)


def _psi_ratio_profile(psi, kmax=60):
    x = 2.0 ** -np.arange(0, kmax + 1, dtype=float)
    return psi.values(x) / x**2


def construct_majorant(psi: YoungFunction, n_blocks: int):
    """Majorant failing the square Dini condition with ``sum psi(w(2**-n)) < inf``.

    Steps: ``alpha(t) = psi(sqrt(t))``; ``t_n`` solves ``alpha(t)/t = 1/n**2``;
    each ``(t_{n+1}, t_n]`` is split uniformly into ``ceil(1/t_n)`` points; the
    joined decreasing sequence gets one extra value per dyadic gap and
    geometric-mean insertions until consecutive ratios are at most 2; node
    ``j`` of the majorant is ``sqrt(w_j)``.

    Returns ``(Majorant, MajorantTrace)``.
    """
    if n_blocks < 1:
        raise ValueError("n_blocks must be positive")
    r = _psi_ratio_profile(psi)
    if not (np.all(r[1:] < r[:-1]) and r[-1] < r[0] / 10):
        raise PreconditionError("psi(x)/x^2 must decrease strictly to 0 as x decreases")

    def ratio(t):
        return psi.values(np.sqrt(t)) / t

    n = np.arange(1, n_blocks + 2, dtype=float)
    target = 1.0 / n**2
    lo = np.full_like(n, -60.0)
    hi = np.zeros_like(n)
    top = ratio(np.ones(1))[0]
    bottom = ratio(np.array([2.0**-60]))[0]
    for i, tg in enumerate(target):
        if top < tg:
            raise ConstructionError(f"no root for block n={i + 1}: alpha(1) < 1/n^2")
        if bottom > tg:
            raise ConstructionError(f"no root for block n={i + 1} above 2^-60")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        up = ratio(np.exp2(mid)) >= target
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
        if np.all(hi - lo < 1e-15):
            break
    t = np.exp2(hi)

    notes = []
    blocks, sums, asums, counts = [], [], [], []
    for i in range(n_blocks):
        tn, tn1 = t[i], t[i + 1]
        Nn = int(math.ceil(1.0 / tn - 1e-9))
        if Nn > BLOCK_CAP:
            notes.append(f"block {i + 1}: N_n capped at {BLOCK_CAP}")
            Nn = BLOCK_CAP
        k = np.arange(Nn, 0, -1, dtype=float)
        pts = tn1 + (k / Nn) * (tn - tn1)
        blocks.append(pts)
        counts.append(Nn)
        sums.append(pts.sum())
        asums.append(psi.values(np.sqrt(pts)).sum())
    if notes:
        warnings.warn(f"{len(notes)} block(s) capped at {BLOCK_CAP} points", AccuracyWarning, stacklevel=2)
    seq = np.concatenate(blocks)

    extra = []
    J = int(math.floor(-math.log2(seq[-1])))
    for j in range(J + 1):
        x0 = 2.0 ** (-j - 0.5)
        above = seq[seq > x0]
        below = seq[seq < x0]
        if above.size and below.size:
            g = math.sqrt(above[-1] * below[0])
        else:
            g = x0
        extra.append(min(max(g, 2.0 ** -(j + 1) * (1 + 1e-15)), 2.0**-j))
    seq = np.sort(np.concatenate([seq, extra]))[::-1]
    inserted = len(extra)
    while True:
        q = seq[:-1] / seq[1:]
        bad = np.flatnonzero(q > 2.0)
        if bad.size == 0:
            break
        seq = np.insert(seq, bad + 1, np.sqrt(seq[bad] * seq[bad + 1]))
        inserted += bad.size

    c = float(np.max(seq[:-1] / seq[1:]))
    gamma = min(0.99, math.log(c) / math.log(1 + c)) if c > 1 else 0.5
    w = Majorant(np.sqrt(seq), gamma_candidate=gamma)
    cum = np.cumsum(sums)
    trace = MajorantTrace(
        t=t,
        N=np.array(counts),
        block_sums=np.array(sums),
        block_alpha_sums=np.array(asums),
        sequence=seq,
        inserted=inserted,
        c_sum=float(np.min(cum / np.arange(1, n_blocks + 1))),
        warnings=notes,
    )
    return w, trace


def psi_node_series(w: Majorant, psi: YoungFunction, tol=1e-6):
    """Terms ``psi(w(2**-n))`` and the first ``n0`` beyond which all are < tol."""
    terms = psi.values(w.values)
    big = np.flatnonzero(terms >= tol)
    n0 = int(big[-1] + 1) if big.size else 0
    return terms, np.cumsum(terms), n0


@dataclass
class RegularityReport:
    c_ratio: float
    gammas: tuple
    ratio_nondecreasing: dict
    ratio_nonincreasing: dict
    w_over_t_nonincreasing: bool


def _log_ratio(w, gamma):
    # log of w(t)/t**gamma at the nodes, t = 2**-k
    k = np.arange(len(w.values), dtype=float)
    return np.log(w.values) + gamma * k * LN2


def majorant_regularity_check(w: Majorant, gammas=GAMMA_GRID) -> RegularityReport:
    """Measure both monotonicity readings of ``w(t)/t**gamma`` and of ``w(t)/t``."""
    nondec, noninc = {}, {}
    for g in gammas:
        L = _log_ratio(w, g)
        d = np.diff(L)  # along increasing k, i.e. decreasing t
        tol = 1e-12 * (np.abs(L[1:]) + 1)
        nondec[g] = bool(np.all(d <= tol))
        noninc[g] = bool(np.all(d >= -tol))
    L1 = _log_ratio(w, 1.0)
    d1 = np.diff(L1)
    return RegularityReport(
        w.c_ratio,
        tuple(gammas),
        nondec,
        noninc,
        bool(np.all(d1 >= -1e-12 * (np.abs(L1[1:]) + 1))),
    )
