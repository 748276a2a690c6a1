"""Probability/density types, divergences and i.i.d. channel extension.

All entropies are in nats. Quantum quantities go through one primitive,
the clipped Hermitian eigendecomposition :func:`eigh_psd`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import itertools
from typing import Sequence, Union

import numpy as np

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    NonStochasticRow,
    NotHermitian,
    NotPositiveSemidefinite,
    TraceNotOne,
    VariantMismatch,
)

PROB_TOL = 1e-12
SUPPORT_TOL = 1e-12
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
# max number of entries materialized by exact enumeration
DEFAULT_BUDGET = 10**7


def eigh_psd(a: np.ndarray, psd_tol: float = PSD_TOL):
    """Eigendecomposition of a Hermitian PSD matrix with drift clipped to 0.

    Raises NotPositiveSemidefinite if an eigenvalue is below ``-psd_tol``.
    """
    w, v = np.linalg.eigh(a)
    if w.size and w[0] < -psd_tol:
        raise NotPositiveSemidefinite(f"eigenvalue {w[0]:.3e} below -{psd_tol}")
    return np.clip(w, 0.0, None), v


def matrix_power_on_support(w: np.ndarray, v: np.ndarray, power: float) -> np.ndarray:
    """``A**power`` restricted to the support of A (zero eigenvalues stay zero)."""
    keep = w > SUPPORT_TOL
    wk = w[keep] ** power
    vk = v[:, keep]
    return (vk * wk) @ vk.conj().T


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProbDist:
    """Probability vector; entries nonnegative, sum 1 within 1e-12."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise DimensionMismatch(f"probability vector must be 1-D and nonempty, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise NonStochasticRow(f"negative or non-finite mass in {p}")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise NonStochasticRow(f"masses sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", _readonly(p))

    @property
    def dim(self) -> int:
        return self.probs.size

    @property
    def kind(self) -> str:
        return "classical"

    def __repr__(self):
        return f"ProbDist({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian PSD trace-one matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clipped to zero; the stored
    ``entries`` are the Hermitian part of the input.
    """

    entries: np.ndarray
    _eig: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionMismatch(f"density matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NotHermitian("non-finite entries")
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
            raise NotHermitian("matrix is not Hermitian within 1e-10")
        a = (a + a.conj().T) / 2
        tr = np.trace(a).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise TraceNotOne(f"trace is {tr!r}")
        w, v = eigh_psd(a)
        object.__setattr__(self, "entries", _readonly(a))
        object.__setattr__(self, "_eig", (_readonly(w), _readonly(v)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def kind(self) -> str:
        return "cq"

    def eigh(self):
        """Cached clipped eigendecomposition ``(w, v)``."""
        return self._eig

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


State = Union[ProbDist, DensityMatrix]


class Channel:
    """Classical row-stochastic channel or classical-quantum channel.

    Build with :meth:`classical` / :meth:`cq` (validated) or
    :func:`validate_channel` from a raw JSON-style description.
    """

    def __init__(self, kind: str, *, matrix=None, states: Sequence[DensityMatrix] = None):
        if kind == "classical":
            m = np.array(matrix, dtype=float)
            if m.ndim != 2:
                raise DimensionMismatch(f"channel matrix must be 2-D, got shape {m.shape}")
            rows = tuple(ProbDist(row) for row in m)
            self.matrix = _readonly(np.array([r.probs for r in rows]))
            self.rows = rows
        elif kind == "cq":
            states = tuple(states)
            if states and len({s.dim for s in states}) != 1:
                raise DimensionMismatch("cq output states must share one dimension")
            self.rows = states
            self.matrix = None
        else:
            raise ValueError(f"unknown channel kind {kind!r}")
        if len(self.rows) < 2:
            raise DimensionMismatch("a channel needs at least two inputs")
        self.kind = kind

    @classmethod
    def classical_from(cls, matrix) -> "Channel":
        return cls("classical", matrix=matrix)

    @classmethod
    def cq_from(cls, states) -> "Channel":
        return cls("cq", states=[s if isinstance(s, DensityMatrix) else DensityMatrix(s) for s in states])

    @property
    def n_inputs(self) -> int:
        return len(self.rows)

    @property
    def out_dim(self) -> int:
        """|Y| for classical channels, d for cq channels."""
        return self.rows[0].dim

    @property
    def is_quantum(self) -> bool:
        return self.kind == "cq"

    def __getitem__(self, x: int) -> State:
        return self.rows[x]

    @cached_property
    def state_array(self) -> np.ndarray:
        """cq channels: stacked output matrices, shape (|X|, d, d)."""
        return np.array([s.entries for s in self.rows])

    def relabel(self, perm: Sequence[int]) -> "Channel":
        """Channel whose input x is this channel's input ``perm[x]``."""
        if self.is_quantum:
            return Channel("cq", states=[self.rows[i] for i in perm])
        return Channel("classical", matrix=self.matrix[list(perm)])

    def __repr__(self):
        return f"Channel(kind={self.kind!r}, inputs={self.n_inputs}, out_dim={self.out_dim})"


def validate_channel(raw: dict) -> Channel:
    """Build a Channel from its JSON description, rejecting invalid data.

    ``{"kind": "classical", "matrix": [[...], ...]}`` with one row per input, or
    ``{"kind": "cq", "states": [{"re": [[...]], "im": [[...]]}, ...]}``.
    Nothing is renormalized.
    """
    kind = raw.get("kind")
    if kind == "classical":
        return Channel("classical", matrix=raw["matrix"])
    if kind == "cq":
        states = []
        for st in raw["states"]:
            re = np.array(st["re"], dtype=float)
            im = np.array(st.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                raise DimensionMismatch("re/im parts differ in shape")
            states.append(DensityMatrix(re + 1j * im))
        return Channel("cq", states=states)
    raise ValueError(f"unknown channel kind {kind!r}")


def channel_to_json(W: Channel) -> dict:
    if W.is_quantum:
        return {
            "kind": "cq",
            "states": [{"re": s.entries.real.tolist(), "im": s.entries.imag.tolist()} for s in W.rows],
        }
    return {"kind": "classical", "matrix": W.matrix.tolist()}


def _check_pair(a: State, b: State):
    if type(a) is not type(b):
        raise VariantMismatch(f"cannot compare {type(a).__name__} with {type(b).__name__}")
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions {a.dim} and {b.dim} differ")


def _check_state_for(W: Channel, sigma: State):
    expected = DensityMatrix if W.is_quantum else ProbDist
    if not isinstance(sigma, expected):
        raise VariantMismatch(f"{W.kind} channel needs a {expected.__name__} reference state")
    if sigma.dim != W.out_dim:
        raise DimensionMismatch(f"state dimension {sigma.dim} != channel output dimension {W.out_dim}")


def _kl(a: np.ndarray, b: np.ndarray) -> float:
    if np.any((a > SUPPORT_TOL) & (b <= SUPPORT_TOL)):
        return np.inf
    m = (a > 0) & (b > 0)
    d = float(np.sum(a[m] * (np.log(a[m]) - np.log(b[m]))))
    return max(d, 0.0)


def _support_leak(a: np.ndarray, wb: np.ndarray, vb: np.ndarray) -> float:
    """Tr a P where P projects onto the kernel of b."""
    ker = vb[:, wb <= SUPPORT_TOL]
    if ker.shape[1] == 0:
        return 0.0
    return float(np.einsum("ij,ik,kj->", ker.conj(), a, ker).real)


def _neg_entropy(w: np.ndarray) -> float:
    """Tr a log a from eigenvalues."""
    w = w[w > 0]
    return float(np.sum(w * np.log(w)))


def _cross_log(a: np.ndarray, wb: np.ndarray, vb: np.ndarray) -> float:
    """Tr a log b, with log b taken on the support of b."""
    keep = wb > SUPPORT_TOL
    vk = vb[:, keep]
    diag = np.einsum("ij,ik,kj->j", vk.conj(), a, vk).real
    return float(np.sum(diag * np.log(wb[keep])))


def _qrel(a: DensityMatrix, wb: np.ndarray, vb: np.ndarray) -> float:
    if _support_leak(a.entries, wb, vb) > SUPPORT_TOL:
        return np.inf
    d = _neg_entropy(a.eigh()[0]) - _cross_log(a.entries, wb, vb)
    return max(d, 0.0)


def relative_entropy(a: State, b: State) -> float:
    """D(a||b) in nats; ``inf`` when supp(a) is not inside supp(b).

    >>> relative_entropy(ProbDist([1, 0]), ProbDist([0.5, 0.5]))  # doctest: +ELLIPSIS
    0.693147...
    """
    _check_pair(a, b)
    if isinstance(a, ProbDist):
        return _kl(a.probs, b.probs)
    wb, vb = b.eigh()
    return _qrel(a, wb, vb)


def divergences_to(W: Channel, sigma: State) -> np.ndarray:
    """Vector of D(W_x||sigma) over all inputs x."""
    _check_state_for(W, sigma)
    if not W.is_quantum:
        return np.array([_kl(row, sigma.probs) for row in W.matrix])
    wb, vb = sigma.eigh()
    return np.array([_qrel(s, wb, vb) for s in W.rows])


def _as_input_dist(p, W: Channel) -> ProbDist:
    p = p if isinstance(p, ProbDist) else ProbDist(p)
    if p.dim != W.n_inputs:
        raise DimensionMismatch(f"input distribution has {p.dim} entries, channel has {W.n_inputs} inputs")
    return p


def output_average(p, W: Channel) -> State:
    """W_p = sum_x p(x) W_x."""
    p = _as_input_dist(p, W)
    if W.is_quantum:
        return DensityMatrix(np.tensordot(p.probs, W.state_array, axes=1))
    avg = p.probs @ W.matrix
    # p @ W can drift from 1 by a few ulps
    return ProbDist(avg / avg.sum())


def j_functional(p, sigma: State, W: Channel) -> float:
    """J(p, sigma, W) = sum_x p(x) D(W_x||sigma); terms with p(x)=0 are dropped."""
    p = _as_input_dist(p, W)
    d = divergences_to(W, sigma)
    m = p.probs > 0
    if np.any(np.isinf(d[m])):
        return np.inf
    return float(np.dot(p.probs[m], d[m]))


def mutual_information(p, W: Channel) -> float:
    """I(p, W) = J(p, W_p, W)."""
    p = _as_input_dist(p, W)
    return j_functional(p, output_average(p, W), W)


def words(alphabet: int, n: int) -> np.ndarray:
    """All words of length n in mixed-radix order (last letter least significant)."""
    if alphabet**n > DEFAULT_BUDGET:
        raise BudgetExceeded(f"{alphabet}^{n} words exceed budget {DEFAULT_BUDGET}")
    return np.array(list(itertools.product(range(alphabet), repeat=n)), dtype=np.int64).reshape(-1, n)


def word_index(word: Sequence[int], alphabet: int) -> int:
    idx = 0
    for letter in word:
        idx = idx * alphabet + int(letter)
    return idx


def word_distribution(W: Channel, word: Sequence[int]) -> np.ndarray:
    """Classical: output distribution of W^(n) for input ``word`` over Y^n."""
    out = W.matrix[word[0]]
    for x in word[1:]:
        out = np.kron(out, W.matrix[x])
    return out


def word_state(W: Channel, word: Sequence[int]) -> np.ndarray:
    """cq: tensor-product output matrix for input ``word``."""
    out = W.state_array[word[0]]
    for x in word[1:]:
        out = np.kron(out, W.state_array[x])
    return out


def tensor_power(sigma: State, n: int) -> np.ndarray:
    base = sigma.probs if isinstance(sigma, ProbDist) else sigma.entries
    out = base
    for _ in range(n - 1):
        out = np.kron(out, base)
    return out


def iid_extend(W: Channel, n: int, budget: int = DEFAULT_BUDGET) -> Channel:
    """Materialize the memoryless extension W^(n) over input words X^n.

    Input and output words are indexed in mixed-radix order with the last
    letter least significant.
    """
    if n < 1:
        raise ValueError("block length must be positive")
    if n == 1:
        return W
    inputs = W.n_inputs**n
    if W.is_quantum:
        size = inputs * W.out_dim ** (2 * n)
    else:
        size = inputs * W.out_dim**n
    if size > budget:
        raise BudgetExceeded(f"materializing W^({n}) needs {size} entries > budget {budget}")
    all_inputs = words(W.n_inputs, n)
    if W.is_quantum:
        return Channel("cq", states=[DensityMatrix(word_state(W, w)) for w in all_inputs])
    return Channel("classical", matrix=[word_distribution(W, w) for w in all_inputs])
