"""Simultaneous approximation on a compact subset of the circle.

Each stage builds a smooth log-modulus bump ``psi`` (equal to ``log gamma`` on
a long arc and with mean zero), the outer function ``G = exp(psi + i psi~)``
and ``F = 1 - G``.  The stage polynomial is the monomial lift ``F(z**m)``.
Lifts are stored sparsely, since ``m`` quickly outgrows any dense array, and
the running intersection ``K`` of the lifted arc sets is handled exactly with
rational arithmetic.
"""
from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import erf

from .analytic import DEGREE_CAP, BoundaryGrid, TaylorSeries, sample_on_circle
from .errors import CapError, PrecisionError, PreconditionError, ResourceError
from .innerouter import outer_from_log_modulus

__all__ = [
    "ArcSet",
    "WeightSequence",
    "SAConfig",
    "Bump",
    "FResult",
    "LiftedSeries",
    "LiftedIntersection",
    "StageResult",
    "SAWitness",
    "PairingResult",
    "ExactAtoms",
    "L1wResult",
    "build_bump",
    "build_F",
    "lift_power",
    "l1w_norm",
    "sa_pipeline",
    "truncate_to_polynomials",
    "pairing_annihilation_demo",
    "exact_turn",
    "SQRT_ZETA2",
]

SQRT_ZETA2 = math.pi / math.sqrt(6.0)
KAPPA = 10.0
MAX_PLATEAU = 700.0
M_START = 4096
M_CAP = 2**16
ARC_MATERIALIZE_CAP = 2**16


def exact_turn(x) -> Fraction:
    """Exact rational value of an angle in turns.

    Floats are read through their shortest decimal representation so that
    ``0.1`` becomes ``1/10``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


def _frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


# ----------------------------------------------------------------------------
# arcs


class ArcSet:
    """Finite union of closed arcs, endpoints in turns, kept sorted and disjoint."""

    __slots__ = ("arcs",)

    def __init__(self, arcs=()):
        pieces = []
        for s, e in arcs:
            s, e = exact_turn(s), exact_turn(e)
            length = e - s
            if length <= 0:
                continue
            if length >= 1:
                pieces = [(Fraction(0), Fraction(1))]
                break
            s0 = _frac(s)
            e0 = s0 + length
            if e0 <= 1:
                pieces.append((s0, e0))
            else:
                pieces.append((s0, Fraction(1)))
                pieces.append((Fraction(0), e0 - 1))
        self.arcs = tuple(self._merge(pieces))

    @staticmethod
    def _merge(pieces):
        pieces = sorted(pieces)
        out = []
        for s, e in pieces:
            if out and s <= out[-1][1]:
                if e > out[-1][1]:
                    out[-1] = (out[-1][0], e)
            else:
                out.append((s, e))
        return out

    @classmethod
    def full(cls):
        return cls([(0, 1)])

    @classmethod
    def empty(cls):
        return cls()

    @classmethod
    def centered(cls, center, length):
        c, L = exact_turn(center), exact_turn(length)
        return cls([(c - L / 2, c + L / 2)])

    @property
    def measure(self) -> Fraction:
        return sum((e - s for s, e in self.arcs), Fraction(0))

    def __len__(self):
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)

    def __eq__(self, other):
        return isinstance(other, ArcSet) and self.arcs == other.arcs

    def __repr__(self):
        return f"ArcSet({[(float(s), float(e)) for s, e in self.arcs]})"

    def intersect(self, other: "ArcSet") -> "ArcSet":
        out, i, j = [], 0, 0
        A, B = self.arcs, other.arcs
        while i < len(A) and j < len(B):
            s = max(A[i][0], B[j][0])
            e = min(A[i][1], B[j][1])
            if s < e:
                out.append((s, e))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        res = ArcSet()
        res.arcs = tuple(out)
        return res

    def union(self, other: "ArcSet") -> "ArcSet":
        res = ArcSet()
        res.arcs = tuple(self._merge(list(self.arcs) + list(other.arcs)))
        return res

    def complement(self) -> "ArcSet":
        out, prev = [], Fraction(0)
        for s, e in self.arcs:
            if s > prev:
                out.append((prev, s))
            prev = e
        if prev < 1:
            out.append((prev, Fraction(1)))
        res = ArcSet()
        res.arcs = tuple(out)
        return res

    def contains(self, theta) -> bool:
        t = _frac(exact_turn(theta))
        for s, e in self.arcs:
            if s <= t <= e:
                return True
        # an arc ending at 1 also closes at 0
        return t == 0 and bool(self.arcs) and self.arcs[-1][1] == 1

    def to_list(self):
        return [[float(s), float(e)] for s, e in self.arcs]

    def to_exact_list(self):
        return [[str(s), str(e)] for s, e in self.arcs]


# ----------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightSequence:
    """Decreasing positive weights ``w_n``.

    Rules: ``power`` gives ``(n + shift)**-a`` with params ``(a, shift)``;
    ``log`` gives ``1/log(n + shift)`` with params ``(shift,)`` and
    ``shift > 1``; ``geometric`` gives ``q**n`` with params ``(q,)`` and
    ``0 < q < 1``; ``table`` holds explicit values for ``n <= n_max``.
    """

    rule: str
    params: tuple = ()
    n_max: int = 2**20
    table: tuple = ()

    def __post_init__(self):
        if self.rule not in ("power", "log", "geometric", "table"):
            raise ValueError(f"unknown weight rule {self.rule!r}")
        if self.rule == "geometric":
            # q**n underflows long before any realistic n_max, so the
            # grid checks below would misfire; the rule is checked directly
            if len(self.params) != 1 or not (0 < self.params[0] < 1):
                raise PreconditionError("geometric weights need a ratio q in (0, 1)")
            return
        if self.rule == "table":
            if not self.table:
                raise ValueError("table rule needs values")
            object.__setattr__(self, "n_max", len(self.table) - 1)
        vals = self.values(min(self.n_max, 2**16))
        if not np.all(vals > 0):
            raise PreconditionError("weights must be strictly positive")
        if np.any(np.diff(vals) > 0):
            raise PreconditionError("weights must be nonincreasing")
        if not self.value(self.n_max) < self.value(0) / 10:
            raise PreconditionError("weights must decay: w_{n_max} < w_0 / 10")

    @classmethod
    def power(cls, a=0.25, shift=2, n_max=2**20):
        return cls("power", (float(a), float(shift)), n_max)

    @classmethod
    def log(cls, shift=math.e, n_max=2**20):
        return cls("log", (float(shift),), n_max)

    @classmethod
    def geometric(cls, q=0.5, n_max=2**20):
        return cls("geometric", (float(q),), n_max)

    @classmethod
    def from_values(cls, values):
        return cls("table", (), 0, tuple(float(v) for v in values))

    def value(self, n) -> float:
        """``w_n`` for a (possibly huge) nonnegative integer ``n``."""
        n = int(n)
        if n < 0:
            raise ValueError("weight index must be nonnegative")
        if self.rule == "table":
            if n > self.n_max:
                raise ResourceError(f"weight table ends at n={self.n_max}, index {n} requested")
            return self.table[n]
        if self.rule == "power":
            a, shift = self.params
            return float((n + shift) ** -a) if n < 2**900 else math.exp(-a * math.log(n))
        if self.rule == "geometric":
            (q,) = self.params
            return math.exp(n * math.log(q)) if n < 2**1000 else 0.0
        (shift,) = self.params
        return 1.0 / math.log(n + shift)

    def values_at(self, idx):
        """Vectorized ``w_n`` for an integer array (float64 indices allowed)."""
        idx = np.asarray(idx, dtype=float)
        if self.rule == "table":
            if idx.size and idx.max() > self.n_max:
                raise ResourceError(f"weight table ends at n={self.n_max}")
            return np.asarray(self.table)[idx.astype(np.int64)]
        if self.rule == "power":
            a, shift = self.params
            return (idx + shift) ** -a
        if self.rule == "geometric":
            (q,) = self.params
            return np.exp(idx * math.log(q))
        (shift,) = self.params
        return 1.0 / np.log(idx + shift)

    def values(self, n_max=None):
        n_max = self.n_max if n_max is None else n_max
        return self.values_at(np.arange(n_max + 1))

    def to_dict(self):
        d = {"rule": self.rule, "params": list(self.params), "n_max": self.n_max}
        if self.rule == "table":
            d["table"] = list(self.table)
        return d

    @classmethod
    def from_dict(cls, d):
        if d["rule"] == "table":
            return cls.from_values(d["table"])
        return cls(d["rule"], tuple(d.get("params", ())), int(d.get("n_max", 2**20)))


# ----------------------------------------------------------------------------
# bump and outer factor


@dataclass(frozen=True, eq=False)
class Bump:
    grid: BoundaryGrid
    gamma: float
    delta: float
    transition: float
    h: float
    on_arc: np.ndarray  # grid mask of A_delta

    @property
    def M(self):
        return self.grid.M


def _signed_turn(theta):
    return (np.asarray(theta) + 0.5) % 1.0 - 0.5


def _smoothstep(s):
    """Erf ramp rescaled to hit 0 at s=0 and 1 at s=1 exactly."""
    s = np.clip(s, 0.0, 1.0)
    e = erf(KAPPA / 2)
    return (erf(KAPPA * (s - 0.5)) + e) / (2 * e)


def build_bump(gamma, delta, transition=None, M=M_START) -> Bump:
    """Mean-zero real bump equal to ``log gamma`` on ``A_delta``.

    ``A_delta`` is the closed arc of length ``1 - delta`` centred at angle 0.
    The ramps of width ``transition`` (default ``delta/8``) sit in the
    complementary arc and lead to a plateau of height ``h`` chosen in closed
    form so that the grid mean vanishes.
    """
    if not (0 < gamma <= 1):
        raise PreconditionError("gamma must lie in (0, 1]")
    if not (0 < delta < 1):
        raise PreconditionError("delta must lie in (0, 1)")
    tau = delta / 8 if transition is None else float(transition)
    if not (0 < tau < delta / 4):
        raise PreconditionError(f"transition {tau} must lie in (0, delta/4)")
    th = np.arange(M) / M
    d = np.abs(_signed_turn(th))
    a = (1 - delta) / 2
    S = _smoothstep((d - a) / tau)
    on_arc = d <= a
    L = math.log(gamma)
    if L == 0:
        return Bump(BoundaryGrid(np.zeros(M)), gamma, delta, tau, 0.0, on_arc)
    mS = float(S.mean())
    if mS <= 0:
        raise PreconditionError("grid too coarse to resolve the complementary arc")
    h = -L * (1 - mS) / mS
    psi = L * (1 - S) + h * S
    psi[on_arc] = L
    return Bump(BoundaryGrid(psi), gamma, delta, tau, h, on_arc)


@dataclass(frozen=True, eq=False)
class FResult:
    F: TaylorSeries
    N_value: float
    M: int
    h: float
    max_dev: float
    F0: float
    bump: Bump


def _check_F(F, bump):
    M = bump.M
    dev = 0.0
    for K in (M, 2 * M):
        vals = sample_on_circle(F, K)
        th = np.arange(K) / K
        on = np.abs(_signed_turn(th)) <= (1 - bump.delta) / 2
        dev = max(dev, float(np.max(np.abs(np.abs(vals[on] - 1) - bump.gamma))))
    return dev


def _N_value(F):
    k = np.arange(F.degree + 1)
    return float(np.sqrt(np.sum(k**2 * np.abs(F.coeffs) ** 2)))


def build_F(gamma, delta, transition=None, M=None, M_cap=M_CAP, tol=1e-6) -> FResult:
    """``F = 1 - G`` with ``G`` the outer function of the bump.

    With ``M=None`` the grid starts at 4096 and doubles until
    ``max ||F - 1| - gamma| <= tol`` on ``A_delta`` (checked on the grid and
    on a twice finer one) and ``|F(0)| <= 1e-7``.  Raises
    :class:`PrecisionError` when double precision cannot meet that, which
    happens once ``exp(h)`` times machine epsilon is comparable to ``tol``.
    """
    if gamma == 1:
        bump = build_bump(gamma, delta, transition, M or M_START)
        return FResult(TaylorSeries([0.0]), 0.0, bump.M, 0.0, 0.0, 0.0, bump)
    sizes = [M] if M is not None else [M_START << k for k in range(int(math.log2(M_cap / M_START)) + 1)]
    last = None
    for size in sizes:
        bump = build_bump(gamma, delta, transition, size)
        if bump.h > MAX_PLATEAU:
            raise PrecisionError(
                f"plateau height h={bump.h:.1f} overflows exp (gamma={gamma}, delta={delta})"
            )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            G = outer_from_log_modulus(bump.grid, size // 4)
        F = 1 - G
        dev = _check_F(F, bump)
        F0 = abs(complex(F.coeffs[0]))
        last = (F, bump, dev, F0)
        if dev <= tol and F0 <= 1e-7:
            return FResult(F, _N_value(F), size, bump.h, dev, F0, bump)
    F, bump, dev, F0 = last
    raise PrecisionError(
        f"outer synthesis reached deviation {dev:.3g} (|F(0)|={F0:.3g}) at M={bump.M} "
        f"for gamma={gamma}, delta={delta}, plateau h={bump.h:.1f}"
    )


# ----------------------------------------------------------------------------
# lifts


@dataclass(frozen=True, eq=False)
class LiftedSeries:
    """``F(z**m)`` without materializing the zero coefficients."""

    F: TaylorSeries
    m: int

    def __post_init__(self):
        if int(self.m) < 1:
            raise PreconditionError("lift exponent must be at least 1")
        object.__setattr__(self, "m", int(self.m))

    @property
    def degree(self):
        return self.m * self.F.degree

    def support(self):
        """Indices ``m k`` (Python ints) of the stored coefficients."""
        return [self.m * k for k in range(self.F.degree + 1)]

    def coeff(self, n):
        q, r = divmod(int(n), self.m)
        if r or q > self.F.degree:
            return 0j
        return complex(self.F.coeffs[q])

    def to_dense(self, cap=DEGREE_CAP) -> TaylorSeries:
        if self.degree > cap:
            raise CapError(f"lift degree {self.degree} exceeds cap {cap}")
        c = np.zeros(self.degree + 1, dtype=complex)
        c[:: self.m] = self.F.coeffs
        return TaylorSeries(c)

    def eval_turns(self, thetas):
        """Values on the circle at exact angles (turns), reducing ``m theta`` exactly."""
        xs = np.array([float(_frac(self.m * exact_turn(t))) for t in thetas])
        return self.F(np.exp(2j * math.pi * xs))


class LiftedIntersection:
    """``K = intersection of {theta : frac(m_k theta) in A_k}`` with nested ``m_k``.

    Each ``m_k`` divides ``m_{k+1}``.  The measure is computed exactly by a
    recursion over levels that counts whole periods and treats the two
    partial periods at the ends of every piece separately.
    """

    def __init__(self, ms=(), halfs=()):
        self.ms = [int(m) for m in ms]
        self.halfs = [exact_turn(a) for a in halfs]
        for a, b in zip(self.ms, self.ms[1:]):
            if b % a:
                raise PreconditionError("lift exponents must be nested multiples")

    def extended(self, m, delta) -> "LiftedIntersection":
        return LiftedIntersection(self.ms + [m], self.halfs + [(1 - exact_turn(delta)) / 2])

    @property
    def depth(self):
        return len(self.ms)

    def contains(self, theta) -> bool:
        t = exact_turn(theta)
        for m, a in zip(self.ms, self.halfs):
            x = _frac(m * t)
            if not (x <= a or x >= 1 - a):
                return False
        return True

    def measure(self) -> Fraction:
        n = self.depth
        if n == 0:
            return Fraction(1)
        ms, halfs = self.ms, self.halfs
        q = [None] + [ms[k] // ms[k - 1] for k in range(1, n)]

        @lru_cache(maxsize=None)
        def period(k):
            return piece(k, Fraction(0), Fraction(1))

        def span(k, s, t):
            # integral of h_k over the real interval [s, t]
            fs, ft = math.floor(s), math.floor(t)
            if fs == ft:
                return piece(k, s - fs, t - fs)
            total = piece(k, s - fs, Fraction(1)) + piece(k, Fraction(0), t - ft)
            if ft - fs > 1:
                total += (ft - fs - 1) * period(k)
            return total

        @lru_cache(maxsize=None)
        def piece(k, a, b):
            # integral of h_k over [a, b] inside one period
            half = halfs[k]
            total = Fraction(0)
            for lo, hi in ((Fraction(0), half), (1 - half, Fraction(1))):
                c, d = max(a, lo), min(b, hi)
                if c >= d:
                    continue
                if k == n - 1:
                    total += d - c
                else:
                    total += span(k + 1, q[k + 1] * c, q[k + 1] * d) / q[k + 1]
            return total

        return period(0)

    def to_arcset(self, max_arcs=ARC_MATERIALIZE_CAP) -> ArcSet:
        K = ArcSet.full()
        for m, a in zip(self.ms, self.halfs):
            if m > max_arcs:
                raise ResourceError(f"{m} arcs exceed the materialization cap {max_arcs}")
            E = ArcSet([(Fraction(j, m) - a / m, Fraction(j, m) + a / m) for j in range(m)])
            K = K.intersect(E)
        return K

    def sample_points(self, count, seed=0):
        """Deterministic rational points of ``K``: the origin plus seeded draws."""
        rng = random.Random(seed)
        D = (self.ms[-1] if self.ms else 1) << 24
        pts = [Fraction(0)]
        tries = 0
        while len(pts) < count and tries < 50 * count:
            tries += 1
            t = Fraction(rng.randrange(D), D)
            if self.contains(t):
                pts.append(t)
        return pts

    def to_dict(self):
        return {"m": [str(m) for m in self.ms], "half_lengths": [str(a) for a in self.halfs]}


def lift_power(F: TaylorSeries, m: int, delta, cap=DEGREE_CAP):
    """Dense lift ``F(z**m)`` and the pre-image ``E`` of ``A_delta`` under ``z**m``."""
    if m < 1:
        raise PreconditionError("m must be at least 1")
    f = LiftedSeries(F, m).to_dense(cap)
    half = (1 - exact_turn(delta)) / 2
    E = ArcSet([(Fraction(j, m) - half / m, Fraction(j, m) + half / m) for j in range(m)])
    return f, E


# ----------------------------------------------------------------------------
# weighted l1 norms


@dataclass
class L1wResult:
    value: float
    bound: float | None = None
    slack: float | None = None


def _lift_l1w(f: LiftedSeries, w: WeightSequence):
    a = np.abs(f.F.coeffs)
    if w.rule == "table":
        ws = np.array([w.value(n) for n in f.support()])
    else:
        ws = w.values_at(np.arange(f.F.degree + 1, dtype=float) * float(f.m))
    return float(np.sum(a * ws))


def l1w_norm(f, w: WeightSequence, lift=None) -> L1wResult:
    """``sum |f_n| w_n``; with ``lift=(m, N_value)`` also the bound ``w_m sqrt(pi^2/6) N``."""
    if isinstance(f, LiftedSeries):
        value = _lift_l1w(f, w)
        if lift is None and f.m:
            lift = (f.m, None)
    else:
        if w.rule == "table" and f.degree > w.n_max:
            raise PreconditionError(f"degree {f.degree} exceeds weight table n_max={w.n_max}")
        value = float(np.sum(np.abs(f.coeffs) * w.values_at(np.arange(f.degree + 1))))
    if lift is None or lift[1] is None:
        return L1wResult(value)
    m, N = lift
    bound = w.value(m) * SQRT_ZETA2 * N
    return L1wResult(value, bound, bound - value)


def truncate_to_polynomials(f, tail_tol, cap=DEGREE_CAP):
    """Smallest truncation with ``sum_{n > d} |f_n| <= tail_tol``.

    Works on dense series and on lifts; for a lift the cut lands on a
    multiple of ``m``.  Returns ``(truncated, d)``.
    """
    if isinstance(f, LiftedSeries):
        a = np.abs(f.F.coeffs)
        tails = np.concatenate([np.cumsum(a[::-1])[::-1][1:], [0.0]])
        k = int(np.argmax(tails <= tail_tol))
        d = f.m * k
        if d > cap:
            raise CapError(f"truncation degree {d} exceeds cap {cap}")
        return LiftedSeries(f.F.truncate(k), f.m), d
    a = np.abs(f.coeffs)
    tails = np.concatenate([np.cumsum(a[::-1])[::-1][1:], [0.0]])
    d = int(np.argmax(tails <= tail_tol))
    if d > cap:
        raise CapError(f"truncation degree {d} exceeds cap {cap}")
    return f.truncate(d), d


# ----------------------------------------------------------------------------
# pipeline


@dataclass
class SAConfig:
    delta: float
    gamma_seq: list
    delta_seq: list
    epsilon_seq: list | None = None
    M: int | None = None
    degree_cap: int = DEGREE_CAP
    M_cap: int = M_CAP
    transition_frac: float = 0.125
    k_points: int = 256
    seed: int = 0

    def __post_init__(self):
        n = len(self.gamma_seq)
        if n == 0 or len(self.delta_seq) != n:
            raise PreconditionError("gamma_seq and delta_seq must be nonempty and of equal length")
        if self.epsilon_seq is None:
            self.epsilon_seq = [1.0 / k**2 for k in range(1, n + 1)]
        if len(self.epsilon_seq) != n:
            raise PreconditionError("epsilon_seq has the wrong length")
        total = sum(exact_turn(d) for d in self.delta_seq)
        if total > exact_turn(self.delta):
            raise PreconditionError(f"sum of delta_n = {float(total)} exceeds delta = {self.delta}")
        if any(not (0 < g < 1) for g in self.gamma_seq):
            raise PreconditionError("every gamma_n must lie in (0, 1); gamma = 1 gives F = 0")
        if any(not (0 < d < 1) for d in self.delta_seq):
            raise PreconditionError("every delta_n must lie in (0, 1)")

    @property
    def stages(self):
        return len(self.gamma_seq)

    def to_dict(self):
        return {
            "delta": self.delta,
            "gamma_seq": list(self.gamma_seq),
            "delta_seq": list(self.delta_seq),
            "epsilon_seq": list(self.epsilon_seq),
            "M": self.M,
            "degree_cap": self.degree_cap,
            "M_cap": self.M_cap,
            "transition_frac": self.transition_frac,
            "k_points": self.k_points,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        keys = cls.__dataclass_fields__
        return cls(**{k: v for k, v in d.items() if k in keys})


@dataclass
class StageResult:
    n: int
    gamma: float
    delta: float
    epsilon: float
    m: int
    N_value: float
    M: int
    h: float
    l1w: float
    bound: float
    slack: float
    supK_dev: float
    minK_dev: float
    E_dev: float
    K_measure: Fraction
    lift: LiftedSeries

    def row(self):
        return {
            "n": self.n,
            "m_n": str(self.m),
            "N_n": self.N_value,
            "l1w_norm": self.l1w,
            "l1w_bound": self.bound,
            "l1w_slack": self.slack,
            "supK_dev": self.supK_dev,
            "minK_dev": self.minK_dev,
            "E_dev": self.E_dev,
            "K_measure": float(self.K_measure),
            "grid_M": self.M,
            "plateau_h": self.h,
        }


@dataclass
class SAWitness:
    K: LiftedIntersection
    stages: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    failure: str | None = None

    @property
    def lifts(self):
        return [s.lift for s in self.stages]


def _choose_m(prev_m, w, N, eps):
    """Smallest multiple of ``prev_m`` with ``w_m sqrt(pi^2/6) N <= eps``."""

    def ok(k):
        return w.value(prev_m * k) * SQRT_ZETA2 * N <= eps

    if ok(1):
        return prev_m
    hi = 1
    while not ok(hi):
        hi *= 2
        if w.rule == "table" and prev_m * hi > w.n_max:
            if ok(w.n_max // prev_m):
                hi = w.n_max // prev_m
                break
            raise ResourceError(f"weight table too short: need m beyond n_max={w.n_max}")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return prev_m * hi


def sa_pipeline(w: WeightSequence, config: SAConfig, strict: bool = False) -> SAWitness:
    """Run the stages and collect the witness.

    A stage that cannot be built (for instance a :class:`PrecisionError`
    from the outer synthesis) ends the run: with ``strict=True`` the error
    propagates, otherwise the witness keeps the finished stages and records
    the failure message.
    """
    K = LiftedIntersection()
    witness = SAWitness(K)
    prev_m = 1
    for i, (g, d, eps) in enumerate(zip(config.gamma_seq, config.delta_seq, config.epsilon_seq), start=1):
        try:
            Fr = build_F(g, d, transition=d * config.transition_frac, M=config.M, M_cap=config.M_cap)
        except PrecisionError as exc:
            if strict:
                raise
            witness.failure = f"stage {i}: {exc}"
            break
        m = _choose_m(prev_m, w, Fr.N_value, eps)
        lift = LiftedSeries(Fr.F, m)
        res = l1w_norm(lift, w, lift=(m, Fr.N_value))
        K = K.extended(m, d)
        pts = K.sample_points(config.k_points, seed=config.seed)
        dev = np.abs(lift.eval_turns(pts) - 1)
        witness.stages.append(
            StageResult(
                n=i,
                gamma=g,
                delta=d,
                epsilon=eps,
                m=m,
                N_value=Fr.N_value,
                M=Fr.M,
                h=Fr.h,
                l1w=res.value,
                bound=res.bound,
                slack=res.slack,
                supK_dev=float(dev.max()),
                minK_dev=float(dev.min()),
                E_dev=Fr.max_dev,
                K_measure=K.measure(),
                lift=lift,
            )
        )
        prev_m = m
    witness.K = K
    stages = witness.stages
    witness.checks = {
        "completed": len(stages) == config.stages,
        "measure_K": bool(stages) and stages[-1].K_measure >= 1 - exact_turn(config.delta),
        "l1w_le_eps": all(s.l1w <= s.epsilon for s in stages),
        "supK_within": all(abs(s.supK_dev - s.gamma) <= 1e-5 and abs(s.minK_dev - s.gamma) <= 1e-5 for s in stages),
        "slack_nonneg": all(s.slack >= 0 for s in stages),
        "E_dev": all(s.E_dev <= 1e-5 for s in stages),
        "union_bound": all(
            s.K_measure >= 1 - sum(exact_turn(x) for x in config.delta_seq[: s.n]) for s in stages
        ),
    }
    return witness


# ----------------------------------------------------------------------------
# pairing


@dataclass(frozen=True)
class ExactAtoms:
    """Atomic measure with rational angles, for pairings against huge lifts."""

    thetas_exact: tuple
    weights: tuple
    has_density = False

    def __post_init__(self):
        if len(self.thetas_exact) != len(self.weights):
            raise ValueError("thetas and weights must have equal length")
        object.__setattr__(self, "thetas_exact", tuple(exact_turn(t) for t in self.thetas_exact))
        object.__setattr__(self, "weights", tuple(complex(x) for x in self.weights))

    def scaled(self, c):
        return ExactAtoms(self.thetas_exact, tuple(c * x for x in self.weights))


@dataclass
class PairingResult:
    quadrature: complex
    coefficient: complex
    bound: float
    l1w: float
    sup_ratio: float
    agree: float


def _atom_coeffs(thetas, weights, idx):
    """``sum_a w_a exp(-2 pi i j theta_a)`` with the phase reduced exactly."""
    out = []
    ex = [exact_turn(t) for t in thetas]
    for j in idx:
        s = 0j
        for t, wt in zip(ex, weights):
            s += wt * complex(np.exp(-2j * math.pi * float(_frac(int(j) * t))))
        out.append(s)
    return np.array(out, dtype=complex)


def pairing_annihilation_demo(mu, f, w: WeightSequence, m: int = 0, K=None) -> PairingResult:
    """Both sides of ``|int conj(f zeta^m) dmu| <= ||f||_{l1(w)} sup_j |mu_hat(j)|/w_j``.

    The left side is computed twice: by summing over the atoms of ``mu`` and
    as ``sum_i conj(f_i) mu_hat(i + m)``.  The supremum runs over the indices
    ``i + m`` with ``i`` in the support of ``f``.  Only atomic measures are
    supported; every atom must lie in ``K`` when ``K`` is given.
    """
    if getattr(mu, "has_density", False):
        raise PreconditionError("pairing demo supports atomic measures only")
    thetas = list(mu.thetas_exact) if hasattr(mu, "thetas_exact") else list(mu.thetas)
    weights = [complex(x) for x in mu.weights]
    if K is not None:
        for t in thetas:
            if not K.contains(t):
                raise PreconditionError(f"atom at {t} lies outside K")
    if not thetas or not any(weights):
        return PairingResult(0j, 0j, 0.0, 0.0, 0.0, 0.0)
    lifted = f if isinstance(f, LiftedSeries) else LiftedSeries(f, 1)
    coeffs = lifted.F.coeffs
    idx = [n + m for n in lifted.support()]
    mu_hat = _atom_coeffs(thetas, weights, idx)
    coef_side = complex(np.sum(np.conj(coeffs) * mu_hat))
    fvals = lifted.eval_turns(thetas)
    rot = np.array([np.exp(2j * math.pi * float(_frac(m * exact_turn(t)))) for t in thetas])
    quad_side = complex(np.sum(np.array(weights) * np.conj(fvals * rot)))
    if w.rule == "table":
        wj = np.array([w.value(j) for j in idx])
    else:
        wj = w.values_at(np.array([float(j) for j in idx]))
    sup_ratio = float(np.max(np.abs(mu_hat) / wj))
    norm = l1w_norm(lifted, w).value
    return PairingResult(quad_side, coef_side, norm * sup_ratio, norm, sup_ratio, abs(quad_side - coef_side))
