"""Rate sweeps with random codes on both sides of capacity."""
from __future__ import annotations

from dataclasses import dataclass, field
import csv
import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .capacity import arimoto_blahut
from .codes import error_probability, ml_code
from .core import Channel, State
from .errors import BudgetExceeded
from .renyi import DEFAULT_GRID_POINTS, DEFAULT_S_LO, log_phi_channel
from .simulate import mc_error_probability, random_code

# exact enumeration when N * |Y|^n scoring operations stay below this
EXACT_LIMIT = 10**7
# largest codebook the Monte-Carlo decoder will score
MC_MAX_MESSAGES = 10**6

SWEEP_COLUMNS = ("n", "N", "L", "rate", "p_e", "stderr", "one_minus_pe", "converse_rhs_min", "method", "status")


@dataclass(frozen=True)
class SweepConfig:
    rates: tuple
    block_lengths: tuple
    list_size: int = 1
    rho: Optional[float] = None  # L_n = ceil(exp(rho * n)) when set
    trials: int = 10_000
    seed: int = 0
    method: str = "auto"  # auto | exact | mc
    s_grid: tuple = field(default_factory=lambda: tuple(np.linspace(DEFAULT_S_LO, 0.0, DEFAULT_GRID_POINTS)))

    def __post_init__(self):
        if not self.rates or any(r <= 0 for r in self.rates):
            raise ValueError("rates must be positive")
        if not self.block_lengths or any(n < 1 for n in self.block_lengths):
            raise ValueError("block lengths must be >= 1")
        if self.rho is not None and self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if self.list_size < 1:
            raise ValueError("list size must be positive")
        if self.method not in ("auto", "exact", "mc"):
            raise ValueError(f"unknown method {self.method!r}")

    def list_size_at(self, n: int) -> int:
        if self.rho is None:
            return self.list_size
        return math.ceil(math.exp(self.rho * n))


@dataclass(frozen=True)
class SweepRow:
    n: int
    N: int
    L: int
    p_e: float
    stderr: float
    converse_rhs_min: float
    method: str
    status: str = "ok"

    @property
    def rate(self) -> float:
        return math.log(self.N / self.L) / self.n

    @property
    def one_minus_pe(self) -> float:
        return 1.0 - self.p_e

    def as_tuple(self):
        return (self.n, self.N, self.L, self.rate, self.p_e, self.stderr, self.one_minus_pe,
                self.converse_rhs_min, self.method, self.status)


def converse_success_bound(W: Channel, sigma: State, n: int, N: int, L: int, s_grid: Sequence[float]) -> float:
    """min over s <= 0 of (phi(s|W||sigma)^n (N/L)^s)^(1/(1-s)), an upper bound on 1 - P_e."""
    s = np.asarray(s_grid, dtype=float)
    lp = log_phi_channel(s, W, sigma)
    with np.errstate(invalid="ignore"):
        log_bound = (n * lp + s * math.log(N / L)) / (1 - s)
    log_bound = np.where(np.isnan(log_bound), np.inf, log_bound)
    return float(np.exp(min(0.0, log_bound.min())))


def sweep_point(W: Channel, p_star, sigma: State, n: int, rate: float, cfg: SweepConfig) -> SweepRow:
    L = cfg.list_size_at(n)
    N = math.ceil(L * math.exp(n * rate))
    bound = converse_success_bound(W, sigma, n, N, L, cfg.s_grid)
    work = N * W.out_dim**n
    method = cfg.method
    if method == "auto":
        method = "exact" if work <= EXACT_LIMIT else "mc"
    if (method == "exact" and work > EXACT_LIMIT) or (method == "mc" and N > MC_MAX_MESSAGES):
        return SweepRow(n, N, L, math.nan, math.nan, bound, method, "budget_exceeded")
    encoder = random_code(p_star, n, N, cfg.seed)
    if method == "exact":
        p_e = error_probability(ml_code(encoder, W, L), W, budget=EXACT_LIMIT * n).p_e
        return SweepRow(n, N, L, p_e, 0.0, bound, method)
    est = mc_error_probability(encoder, W, L, cfg.trials, cfg.seed)
    return SweepRow(n, N, L, est.estimate, est.stderr, bound, method)


def run_sweep(W: Channel, cfg: SweepConfig, tol: float = 1e-9) -> list:
    """Rows for every (rate, n) pair, rates outer, block lengths inner.

    Codes are drawn from the capacity-achieving input distribution and the
    converse column uses the matching output state.
    """
    cap = arimoto_blahut(W, tol=tol)
    rows = []
    for rate in cfg.rates:
        for n in cfg.block_lengths:
            try:
                rows.append(sweep_point(W, cap.p_star, cap.sigma_star, n, rate, cfg))
            except BudgetExceeded:
                L = cfg.list_size_at(n)
                rows.append(SweepRow(n, math.ceil(L * math.exp(n * rate)), L, math.nan, math.nan,
                                     math.nan, cfg.method, "budget_exceeded"))
    return rows


def fmt(value) -> str:
    """12 significant digits, locale-free."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".12g")


def write_csv(fh, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
