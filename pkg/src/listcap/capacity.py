"""Channel capacity by alternating maximization, certified by the min-max bound.

For any input distribution p,

    I(p, W) <= C(W) <= max_x D(W_x || W_p),

so every iterate brackets the capacity and the bracket width is a
computable stopping criterion.
"""
from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp

from .core import (
    SUPPORT_TOL,
    Channel,
    DensityMatrix,
    ProbDist,
    State,
    divergences_to,
    eigh_psd,
    output_average,
)
from .errors import NotConverged

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000
P_FLOOR = 1e-300


@dataclass(frozen=True)
class CapacityResult:
    value: float
    p_star: ProbDist
    sigma_star: State
    lower: float
    upper: float
    gap: float
    iterations: int

    def to_json(self, units: str = "nats") -> dict:
        scale = 1.0 / np.log(2) if units == "bits" else 1.0
        return {
            "value": self.value * scale,
            "lower": self.lower * scale,
            "upper": self.upper * scale,
            "gap": self.gap * scale,
            "p_star": self.p_star.probs.tolist(),
            "iterations": self.iterations,
            "units": units,
        }


def capacity_bounds(W: Channel, p) -> tuple[float, float]:
    """(I(p,W), max_x D(W_x||W_p)); the pair sandwiches C(W).

    The upper end may be ``inf`` when some W_x escapes the support of W_p.
    """
    p = p if isinstance(p, ProbDist) else ProbDist(p)
    sigma = output_average(p, W)
    d = divergences_to(W, sigma)
    m = p.probs > 0
    return float(np.dot(p.probs[m], d[m])), float(d.max())


class _ClassicalKernel:
    def __init__(self, W: Channel):
        self.M = W.matrix
        self.pos = self.M > 0
        self.negent = np.array([np.sum(r[r > 0] * np.log(r[r > 0])) for r in self.M])

    def divergences(self, p):
        sigma = p @ self.M
        if np.all(sigma[self.pos.any(axis=0)] > 0):
            log_sigma = np.log(sigma, where=sigma > 0, out=np.zeros_like(sigma))
        else:
            # products of floored masses underflowed
            with np.errstate(divide="ignore"):
                log_sigma = logsumexp(np.log(p)[:, None] + np.log(self.M), axis=0)
        return self.negent - (self.M * log_sigma).sum(axis=1)

    def sigma(self, p):
        s = p @ self.M
        return ProbDist(s / s.sum())


class _QuantumKernel:
    def __init__(self, W: Channel):
        self.states = W.state_array
        self.negent = np.array([np.sum(w[w > 0] * np.log(w[w > 0])) for w in (s.eigh()[0] for s in W.rows)])

    def divergences(self, p):
        w, v = eigh_psd(np.tensordot(p, self.states, axes=1))
        # diag[x, j] = <v_j| W_x |v_j>
        diag = np.einsum("ij,xik,kj->xj", v.conj(), self.states, v).real
        keep = w > SUPPORT_TOL
        leak = diag[:, ~keep].sum(axis=1)
        cross = diag[:, keep] @ np.log(w[keep])
        return np.where(leak > SUPPORT_TOL, np.inf, self.negent - cross)

    def sigma(self, p):
        return DensityMatrix(np.tensordot(p, self.states, axes=1))


def _degenerate(W: Channel) -> bool:
    if W.is_quantum:
        a = W.state_array
    else:
        a = W.matrix
    return bool(np.all(np.abs(a - a[0]) <= 1e-15))


def arimoto_blahut(
    W: Channel,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    on_iteration: Optional[Callable[[int, float, float], None]] = None,
) -> CapacityResult:
    """Capacity of a classical or cq channel with a duality-gap certificate.

    Starting from the uniform input distribution, iterates
    ``p(x) <- p(x) exp(D(W_x||W_p)) / Z`` until
    ``max_x D(W_x||W_p) - I(p,W) <= tol``.

    Parameters
    ----------
    W : Channel
    tol : float
        Target gap in nats.
    max_iter : int
        Iteration cap; exceeding it raises NotConverged carrying the
        best-so-far result.
    on_iteration : callable, optional
        Called as ``on_iteration(t, lower, upper)`` once per iterate.

    Returns
    -------
    CapacityResult
        ``value`` is the midpoint of ``[lower, upper]``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    k = W.n_inputs
    kernel = _QuantumKernel(W) if W.is_quantum else _ClassicalKernel(W)
    p = np.full(k, 1.0 / k)

    if _degenerate(W):
        return CapacityResult(0.0, ProbDist(p), kernel.sigma(p), 0.0, 0.0, 0.0, 0)

    best = None
    for t in range(max_iter + 1):
        d = kernel.divergences(p)
        lower = float(np.dot(p, d))
        upper = float(d.max())
        if on_iteration is not None:
            on_iteration(t, lower, upper)
        if best is None or upper - lower < best[2] - best[1]:
            best = (p, lower, upper, t)
        if upper - lower <= tol:
            break
        p = p * np.exp(d - upper)
        p = np.maximum(p / p.sum(), P_FLOOR)
        p /= p.sum()
    else:
        p, lower, upper, t = best
        result = _result(kernel, p, lower, upper, t)
        raise NotConverged(f"gap {upper - lower:.3e} > tol {tol:.1e} after {max_iter} iterations", result)
    log.debug("converged after %d iterations, gap %.3e", t, upper - lower)
    return _result(kernel, p, lower, upper, t)


def _result(kernel, p, lower, upper, t) -> CapacityResult:
    p = p / p.sum()
    lower = min(lower, upper)
    return CapacityResult(
        value=(lower + upper) / 2,
        p_star=ProbDist(p),
        sigma_star=kernel.sigma(p),
        lower=lower,
        upper=upper,
        gap=upper - lower,
        iterations=t,
    )
