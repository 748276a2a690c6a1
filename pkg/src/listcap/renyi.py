"""Renyi overlaps phi(s|a||b) and the strong-converse exponent.

phi(s|a||b) = sum_y a(y)^(1-s) b(y)^s (classical) or Tr a^(1-s) b^s (quantum).
Both are evaluated in log space from eigen-data: with a = sum_i l_i u_i u_i^*
and b = sum_j m_j v_j v_j^*,

    Tr a^(1-s) b^s = sum_ij l_i^(1-s) m_j^s |<u_i, v_j>|^2,

which reduces to the classical sum when both are diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .core import (
    SUPPORT_TOL,
    Channel,
    DensityMatrix,
    ProbDist,
    State,
    _check_pair,
    _check_state_for,
    divergences_to,
)
from .errors import InfiniteDivergence

# overlaps |<u_i, v_j>|^2 below this are eigensolver noise
OVERLAP_TOL = 1e-15

DEFAULT_S_LO = -8.0
DEFAULT_GRID_POINTS = 257
REFINE_ROUNDS = 3
REFINE_SHRINK = 8.0


class _Overlap:
    """Precomputed log-space terms of phi(s|a||b) for one pair (a, b)."""

    def __init__(self, a: State, b: State):
        if isinstance(a, ProbDist):
            la, lb = a.probs, b.probs
            keep = (la > 0) & (lb > SUPPORT_TOL)
            self.leak = float(la[lb <= SUPPORT_TOL].sum())
            self.log_a = np.log(la[keep])
            self.log_b = np.log(lb[keep])
            self.log_c = np.zeros(self.log_a.size)
        else:
            wa, ua = a.eigh()
            wb, vb = b.eigh()
            c = np.abs(ua.conj().T @ vb) ** 2
            ia = wa > SUPPORT_TOL
            jb = wb > SUPPORT_TOL
            self.leak = float((wa[:, None] * c)[:, ~jb].sum())
            c = c[np.ix_(ia, jb)]
            ii, jj = np.nonzero(c > OVERLAP_TOL)
            self.log_a = np.log(wa[ia][ii])
            self.log_b = np.log(wb[jb][jj])
            self.log_c = np.log(c[ii, jj])

    def log_phi(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.log_a.size == 0:
            out = np.full(s.shape, -np.inf)
        else:
            terms = (1 - s)[:, None] * self.log_a + s[:, None] * self.log_b + self.log_c
            out = logsumexp(terms, axis=1)
        out = np.where((s < 0) & (self.leak > SUPPORT_TOL), np.inf, out)
        return np.where(s == 0, 0.0, out)


def log_phi(s, a: State, b: State):
    """log phi(s|a||b); ``inf`` for s < 0 when supp(a) is not inside supp(b)."""
    _check_pair(a, b)
    out = _Overlap(a, b).log_phi(s)
    return float(out[0]) if np.ndim(s) == 0 else out


def phi(s, a: State, b: State):
    """Renyi overlap phi(s|a||b). Equal to 1 at s = 0 by convention.

    Powers of both arguments are taken on their supports.

    >>> phi(-1.0, ProbDist([1, 0]), ProbDist([0.5, 0.5]))
    2.0
    """
    with np.errstate(over="ignore"):
        return np.exp(log_phi(s, a, b))


def _overlaps(W: Channel, sigma: State):
    _check_state_for(W, sigma)
    return [_Overlap(row, sigma) for row in W.rows]


def log_phi_rows(s, W: Channel, sigma: State) -> np.ndarray:
    """log phi(s|W_x||sigma), shape (len(s), |X|)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return np.stack([ov.log_phi(s) for ov in _overlaps(W, sigma)], axis=1)


def log_phi_channel(s, W: Channel, sigma: State):
    """log of phi(s|W||sigma) = max_x phi(s|W_x||sigma)."""
    out = log_phi_rows(s, W, sigma).max(axis=1)
    return float(out[0]) if np.ndim(s) == 0 else out


def phi_channel(s, W: Channel, sigma: State):
    with np.errstate(over="ignore"):
        return np.exp(log_phi_channel(s, W, sigma))


def phi_slope_check(W: Channel, sigma: State, h: float = 1e-4) -> tuple[float, float]:
    """Compare the one-sided slope log phi(-h|W||sigma)/h with max_x D(W_x||sigma).

    The two agree to O(h).
    """
    if not 0 < h <= 0.01:
        raise ValueError("step h must lie in (0, 0.01]")
    d = divergences_to(W, sigma)
    if np.any(np.isinf(d)):
        raise InfiniteDivergence("some W_x is not supported by sigma")
    numeric = log_phi_channel(-h, W, sigma) / h
    return float(numeric), float(d.max())


@dataclass(frozen=True)
class ExponentQuery:
    rate_r: float
    s_lo: float = DEFAULT_S_LO
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if not self.s_lo < 0:
            raise ValueError("s_lo must be negative")
        if self.grid_points < 3:
            raise ValueError("grid_points must be at least 3")


@dataclass(frozen=True)
class ExponentResult:
    exponent: float
    s_star: float
    # rows (s, phi, objective), sorted by s
    trace: tuple

    def to_csv_rows(self):
        for s, ph, obj in self.trace:
            yield s, ph, np.log(ph), obj


def exponent_objective(s: np.ndarray, rate: float, log_phi_values: np.ndarray) -> np.ndarray:
    """(-s r - log phi(s)) / (1 - s); -inf where phi is infinite."""
    with np.errstate(invalid="ignore"):
        obj = (-s * rate - log_phi_values) / (1 - s)
    return np.where(np.isinf(log_phi_values), -np.inf, obj)


def sc_exponent(query: ExponentQuery, W: Channel, sigma: State) -> ExponentResult:
    """Maximize (-s r - log phi(s|W||sigma))/(1-s) over s in [s_lo, 0].

    A uniform grid is followed by three refinement rounds, each on a bracket
    8x narrower centred on the incumbent. Ties go to the smallest s. The
    endpoint s = 0 scores exactly 0, so the exponent is never negative.
    """
    overlaps = _overlaps(W, sigma)
    r = float(query.rate_r)

    def evaluate(grid):
        lp = np.stack([ov.log_phi(grid) for ov in overlaps], axis=1).max(axis=1)
        return lp, exponent_objective(grid, r, lp)

    seen = {}
    best_s, best_obj = 0.0, 0.0
    lo, hi = query.s_lo, 0.0
    width = hi - lo
    for round_ in range(REFINE_ROUNDS + 1):
        grid = np.linspace(lo, hi, query.grid_points)
        lp, obj = evaluate(grid)
        for s, l, o in zip(grid, lp, obj):
            seen[float(s)] = (float(l), float(o))
        i = int(np.argmax(obj))
        if obj[i] > best_obj or (obj[i] == best_obj and grid[i] < best_s):
            best_s, best_obj = float(grid[i]), float(obj[i])
        width /= REFINE_SHRINK
        lo = max(query.s_lo, best_s - width / 2)
        hi = min(0.0, best_s + width / 2)

    with np.errstate(over="ignore"):
        trace = tuple((s, float(np.exp(l)), o) for s, (l, o) in sorted(seen.items()))
    return ExponentResult(exponent=best_obj, s_star=best_s, trace=trace)


def sc_exponent_curve(rates: Sequence[float], W: Channel, sigma: State, **query_kw) -> np.ndarray:
    """Exponent for each rate in ``rates``."""
    return np.array([sc_exponent(ExponentQuery(r, **query_kw), W, sigma).exponent for r in rates])
