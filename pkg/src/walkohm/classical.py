"""Return probabilities of simple random walks on Z^d.

``u2n(d, model, n)`` is the probability of being back at the origin after
2n steps; ``m = sum_n u_2n`` is the expected number of visits to the origin
(time 0 included), and the return probability is u = 1 - 1/m.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

EXACT_LIMIT = 500
LIMIT_CONSTANT_3D = 3 * math.sqrt(3) / (2 * math.pi ** 1.5)  # lim of bound * n^1.5


def _check_model(d: int, model: str) -> str:
    model = model.lower()
    if model == "sc" and d in (1, 2, 3):
        return model
    if model == "bcc" and d == 3:
        return model
    raise ValueError(f"unsupported model {model!r} in dimension {d}")


def central(n: int) -> Fraction:
    """C(2n, n) / 4^n."""
    return Fraction(comb(2 * n, n), 4 ** n)


def multinomial_square_sum(n: int) -> int:
    """sum over j + k + l = n of (n! / (j! k! l!))^2."""
    fact = [math.factorial(i) for i in range(n + 1)]
    total = 0
    for j in range(n + 1):
        for k in range(n - j + 1):
            m = fact[n] // (fact[j] * fact[k] * fact[n - j - k])
            total += m * m
    return total


def _log_central(n: int) -> float:
    return math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1) - 2 * n * math.log(2)


def u2n(d: int, model: str, n: int, exact: bool | None = None):
    """Probability of being at the origin after 2n steps.

    Exact ``Fraction`` for n <= 500 (or when ``exact=True``), float otherwise.
    """
    model = _check_model(d, model)
    if n < 0:
        raise ValueError("n must be non-negative")
    if exact is None:
        exact = n <= EXACT_LIMIT
    if exact:
        c = central(n)
        if model == "bcc":
            return c ** 3
        if d == 1:
            return c
        if d == 2:
            return c * c
        return c * Fraction(multinomial_square_sum(n), 9 ** n)
    lc = _log_central(n)
    if model == "bcc":
        return math.exp(3 * lc)
    if d == 1:
        return math.exp(lc)
    if d == 2:
        return math.exp(2 * lc)
    return float(sc3_terms(n)[n])


def sc3_terms(n_max: int) -> np.ndarray:
    """u_2n for SC in three dimensions, n = 0..n_max, in floating point.

    Uses a_n = sum_j C(n,j)^2 C(2j,j) (equal to the multinomial square sum),
    which satisfies n^2 a_n = (10n^2 - 10n + 3) a_{n-1} - 9 (n-1)^2 a_{n-2};
    the recursion is run on a_n / 9^n so nothing overflows.
    """
    out = np.empty(n_max + 1)
    b_prev, b = 0.0, 1.0  # a_{-1}/9^-1 is irrelevant (its coefficient vanishes at n = 1)
    c = 1.0
    out[0] = 1.0
    for n in range(1, n_max + 1):
        b_prev, b = b, ((10 * n * n - 10 * n + 3) * b - (n - 1) ** 2 * b_prev) / (9.0 * n * n)
        c *= (2 * n - 1) / (2 * n)
        out[n] = c * b
    return out


def central_terms(n_max: int) -> np.ndarray:
    n = np.arange(1, n_max + 1)
    return np.concatenate([[1.0], np.cumprod((2 * n - 1) / (2 * n))])


def series_terms(d: int, model: str, n_max: int) -> np.ndarray:
    model = _check_model(d, model)
    c = central_terms(n_max)
    if model == "bcc":
        return c ** 3
    if d == 1:
        return c
    if d == 2:
        return c * c
    return sc3_terms(n_max)


# -- bounds ---------------------------------------------------------------------

def balanced_parts(n: int) -> tuple:
    j = n // 3
    parts = [j, j, j]
    for i in range(n - 3 * j):
        parts[i] += 1
    return tuple(parts)


def max_multinomial(n: int) -> int:
    j, k, l = balanced_parts(n)
    return math.factorial(n) // (math.factorial(j) * math.factorial(k) * math.factorial(l))


def u2n_upper_bound_3d(n: int, form: str = "balanced") -> Fraction:
    """Upper bound on u_2n (SC, d = 3) from the largest trinomial coefficient.

    u_2n = c_n sum (M/3^n)^2 <= c_n max(M)/3^n because the M/3^n sum to one.
    ``form="balanced"`` uses the true maximum (parts as equal as possible);
    ``form="floor"`` uses n!/(floor(n/3)!)^3, which is also valid but loose
    by a factor of order n^2 when 3 does not divide n.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if form == "balanced":
        M = max_multinomial(n)
    elif form == "floor":
        M = math.factorial(n) // math.factorial(n // 3) ** 3
    else:
        raise ValueError(f"unknown form {form!r}")
    return central(n) * Fraction(M, 3 ** n)


def log_bound_3d(n: int) -> float:
    j, k, l = balanced_parts(n)
    lm = math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(k + 1) - math.lgamma(l + 1)
    return _log_central(n) + lm - n * math.log(3)


def tail_constant_3d(window: int = 2000) -> float:
    """K with u_2n <= K / n^1.5 for all n >= 1.

    bound(n) n^1.5 increases towards its limit 3 sqrt(3) / (2 pi^1.5), so K
    is the larger of the scanned maximum and that limit.
    """
    scan = max(math.exp(log_bound_3d(n) + 1.5 * math.log(n)) for n in range(1, window + 1))
    return max(scan, LIMIT_CONSTANT_3D)


TAIL_CONSTANT_BCC = math.pi ** -1.5  # c_n <= 1/sqrt(pi n)


@dataclass
class ReturnSum:
    d: int
    model: str
    n_max: int
    partial: float       # sum_{n <= n_max} u_2n
    tail_bound: float    # upper bound on the rest (inf when divergent)
    estimate: float
    divergent: bool

    @property
    def bracket(self) -> tuple:
        return self.partial, self.partial + self.tail_bound


def expected_returns(d: int, model: str = "sc", n_max: int = 10_000) -> ReturnSum:
    """Partial sum of u_2n with a rigorous tail bound in three dimensions."""
    model = _check_model(d, model)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    terms = series_terms(d, model, n_max)
    partial = math.fsum(terms.tolist())
    if d <= 2:
        return ReturnSum(d, model, n_max, partial, math.inf, math.inf, True)
    K = TAIL_CONSTANT_BCC if model == "bcc" else tail_constant_3d()
    tail = 2 * K / math.sqrt(n_max)
    # tail estimate from the last term's n^1.5 behaviour
    est = partial + float(terms[-1]) * n_max ** 1.5 * 2 / math.sqrt(n_max + 0.5)
    return ReturnSum(d, model, n_max, partial, tail, est, False)


# -- the three-dimensional constant --------------------------------------------------

def glasser_zucker_m() -> float:
    """m = sqrt(6)/(32 pi^3) Gamma(1/24) Gamma(5/24) Gamma(7/24) Gamma(11/24)."""
    lg = sum(math.lgamma(k / 24) for k in (1, 5, 7, 11))
    return math.sqrt(6) / (32 * math.pi ** 3) * math.exp(lg)


@dataclass
class ReturnProbability:
    m_closed: float
    u_closed: float
    m_series: tuple   # rigorous bracket from the series
    u_series: tuple
    consistent: bool


def return_probability_3d(n_max: int = 1_000_000) -> ReturnProbability:
    m = glasser_zucker_m()
    s = expected_returns(3, "sc", n_max)
    lo, hi = s.bracket
    return ReturnProbability(m, 1 - 1 / m, (lo, hi), (1 - 1 / lo, 1 - 1 / hi), lo <= m <= hi)


def watson_integral_check(grid: int = 64, octant: bool = True) -> float:
    """Midpoint rule for m = 3/(2pi)^3 * integral over (-pi,pi)^3 of 1/(3 - cos x - cos y - cos z).

    The midpoints never land on the singular corners.  With ``octant`` the
    evenness of cos is used to integrate over (0, pi)^3 only.
    """
    if grid < 8 or grid % 2:
        raise ValueError("grid must be an even integer >= 8")
    h = 2 * math.pi / grid
    if octant:
        x = (np.arange(grid // 2) + 0.5) * h
        weight = 8.0
    else:
        x = -math.pi + (np.arange(grid) + 0.5) * h
        weight = 1.0
    c = np.cos(x)
    total = 0.0
    for cx in c:  # one slab at a time keeps memory flat
        total += float(np.sum(1.0 / (3.0 - cx - c[:, None] - c[None, :])))
    return 3.0 * weight * total / grid ** 3


# -- enumeration and simulation ---------------------------------------------------------

def steps_for(d: int, model: str) -> tuple:
    model = _check_model(d, model)
    if model == "bcc":
        return tuple(itertools.product((1, -1), repeat=3))
    out = []
    for i in range(d):
        for s in (1, -1):
            v = [0] * d
            v[i] = s
            out.append(tuple(v))
    return tuple(out)


def count_closed_walks(steps, length: int) -> int:
    """Number of step sequences of the given length that end at the origin."""
    d = len(steps[0])
    counts = Counter({(0,) * d: 1})
    for _ in range(length):
        nxt = Counter()
        for p, c in counts.items():
            for s in steps:
                nxt[tuple(a + b for a, b in zip(p, s))] += c
        counts = nxt
    return counts[(0,) * d]


def u2n_by_enumeration(d: int, model: str, n: int) -> Fraction:
    steps = steps_for(d, model)
    return Fraction(count_closed_walks(steps, 2 * n), len(steps) ** (2 * n))


def simulate_returns(d: int, model: str, n: int, walks: int, seed: int) -> tuple[float, float]:
    """Mean and standard error of the number of returns to the origin in 2n steps."""
    steps = np.array(steps_for(d, model))
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(d, len(steps))))
    pos = np.zeros((walks, d), dtype=np.int64)
    returns = np.zeros(walks)
    for _ in range(2 * n):
        pos += steps[rng.integers(len(steps), size=walks)]
        returns += np.all(pos == 0, axis=1)
    return float(returns.mean()), float(returns.std(ddof=1) / math.sqrt(walks))
