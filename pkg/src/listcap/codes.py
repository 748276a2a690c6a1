"""List codes over classical and cq channels.

Messages are 0-based array indices internally (JSON files use 1-based ids).
A list decoder assigns every output word (classical) or POVM outcome
(quantum) to one sorted L-subset of messages.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math
from typing import NamedTuple, Sequence, Union

import numpy as np

from .core import (
    DEFAULT_BUDGET,
    Channel,
    DensityMatrix,
    ProbDist,
    State,
    _check_state_for,
    eigh_psd,
    tensor_power,
    word_state,
    words,
)
from .errors import BudgetExceeded, DimensionMismatch, InvalidCode, VariantMismatch
from .renyi import _Overlap, log_phi_rows

POVM_TOL = 1e-10
VIOLATION_SLACK = 1e-12


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Encoder:
    """Codebook: row i is the codeword of message i."""

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] < 1:
            raise InvalidCode(f"encoder table must be N x n with N, n >= 1, got shape {t.shape}")
        if np.any(t < 0):
            raise InvalidCode("negative input letter")
        object.__setattr__(self, "table", _readonly(t))

    @property
    def N(self) -> int:
        return self.table.shape[0]

    @property
    def n(self) -> int:
        return self.table.shape[1]

    def check_alphabet(self, W: Channel):
        if self.table.max() >= W.n_inputs:
            raise InvalidCode(f"letter {self.table.max()} outside input alphabet of size {W.n_inputs}")


@dataclass(frozen=True, eq=False)
class ClassicalListDecoder:
    """Row w lists the sorted L messages decoded from output word w."""

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=np.int64)
        if t.ndim != 2 or t.shape[1] < 1:
            raise InvalidCode(f"decoder table must be (words, L), got shape {t.shape}")
        if t.shape[1] > 1 and np.any(np.diff(t, axis=1) <= 0):
            raise InvalidCode("each decoded list must be strictly increasing")
        if np.any(t < 0):
            raise InvalidCode("negative message id")
        object.__setattr__(self, "table", _readonly(t))

    kind = "classical"

    @property
    def L(self) -> int:
        return self.table.shape[1]

    @property
    def n_words(self) -> int:
        return self.table.shape[0]


@dataclass(frozen=True, eq=False)
class QuantumListDecoder:
    """POVM with one element per sorted L-subset; absent subsets are zero."""

    elements: tuple

    def __post_init__(self):
        elems = []
        for subset, m in self.elements:
            subset = tuple(int(i) for i in subset)
            if list(subset) != sorted(set(subset)) or (subset and subset[0] < 0):
                raise InvalidCode(f"subset {subset} is not a sorted set of distinct ids")
            m = np.array(m, dtype=complex)
            if np.max(np.abs(m - m.conj().T)) > POVM_TOL:
                raise InvalidCode(f"POVM element for {subset} is not Hermitian")
            eigh_psd((m + m.conj().T) / 2, POVM_TOL)
            elems.append((subset, _readonly(m)))
        if not elems:
            raise InvalidCode("empty POVM")
        elems.sort(key=lambda e: e[0])
        if len({e[0] for e in elems}) != len(elems):
            raise InvalidCode("duplicate subset in POVM")
        if len({len(e[0]) for e in elems}) != 1:
            raise InvalidCode("all subsets must have the same size L")
        total = sum(m for _, m in elems)
        if np.max(np.abs(total - np.eye(total.shape[0]))) > POVM_TOL:
            raise InvalidCode("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", tuple(elems))

    kind = "quantum"

    @property
    def L(self) -> int:
        return len(self.elements[0][0])

    @property
    def dim(self) -> int:
        return self.elements[0][1].shape[0]


ListDecoder = Union[ClassicalListDecoder, QuantumListDecoder]


@dataclass(frozen=True, eq=False)
class ListCode:
    encoder: Encoder
    decoder: ListDecoder

    def __post_init__(self):
        N, L = self.encoder.N, self.decoder.L
        if L > N:
            raise InvalidCode(f"list size {L} exceeds message count {N}")
        if isinstance(self.decoder, ClassicalListDecoder):
            top = self.decoder.table.max()
        else:
            top = max(max(s) for s, _ in self.decoder.elements)
        if top >= N:
            raise InvalidCode(f"decoder refers to message {top} but N = {N}")

    @property
    def N(self) -> int:
        return self.encoder.N

    @property
    def L(self) -> int:
        return self.decoder.L

    @property
    def n(self) -> int:
        return self.encoder.n

    @property
    def is_quantum(self) -> bool:
        return isinstance(self.decoder, QuantumListDecoder)


class CodeMetrics(NamedTuple):
    p_e: float
    success: float


def _check_code_channel(code: ListCode, W: Channel):
    if code.is_quantum != W.is_quantum:
        raise VariantMismatch(f"{code.decoder.kind} decoder used with a {W.kind} channel")
    code.encoder.check_alphabet(W)
    if code.is_quantum:
        if code.decoder.dim != W.out_dim**code.n:
            raise DimensionMismatch(f"POVM dimension {code.decoder.dim} != {W.out_dim}^{code.n}")
    elif code.decoder.n_words != W.out_dim**code.n:
        raise DimensionMismatch(f"decoder covers {code.decoder.n_words} words, channel has {W.out_dim}^{code.n}")


def word_probabilities(W: Channel, codewords: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """W^(n)_{codeword}(y) for aligned arrays of codewords and output words.

    The product runs left to right over positions, matching iid_extend.
    """
    prob = W.matrix[codewords[..., 0], ys[..., 0]]
    for l in range(1, codewords.shape[-1]):
        prob = prob * W.matrix[codewords[..., l], ys[..., l]]
    return prob


def _exact_mean(values: np.ndarray, N: int) -> float:
    # exact rational mean: replicated messages (lifts) give bit-identical results
    return float(sum(map(Fraction, values.tolist()), Fraction(0)) / N)


def _message_projectors(code: ListCode) -> list:
    """Y_i = sum of POVM elements whose subset contains i."""
    dim = code.decoder.dim
    Y = [np.zeros((dim, dim), dtype=complex) for _ in range(code.N)]
    for subset, m in code.decoder.elements:
        for i in subset:
            Y[i] = Y[i] + m
    return Y


def _codeword_states(code: ListCode, W: Channel) -> list:
    cache = {}
    out = []
    for row in code.encoder.table:
        key = tuple(row)
        if key not in cache:
            cache[key] = word_state(W, row)
        out.append(cache[key])
    return out


def _quantum_budget(code: ListCode, W: Channel, budget: int):
    size = code.N * W.out_dim ** (2 * code.n)
    if size > budget:
        raise BudgetExceeded(f"quantum evaluation needs {size} entries > budget {budget}")


def message_success(code: ListCode, W: Channel, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Per-message probability that message i is in the decoded list."""
    _check_code_channel(code, W)
    if code.is_quantum:
        _quantum_budget(code, W, budget)
        Y = _message_projectors(code)
        rho = _codeword_states(code, W)
        return np.array([np.einsum("ij,ji->", r, y).real for r, y in zip(rho, Y)])
    table = code.decoder.table
    if table.size * code.n > budget:
        raise BudgetExceeded(f"{table.size * code.n} scoring entries > budget {budget}")
    ys = words(W.out_dim, code.n)
    cw = code.encoder.table[table]  # (words, L, n)
    prob = word_probabilities(W, cw, np.broadcast_to(ys[:, None, :], cw.shape))
    return np.bincount(table.ravel(), weights=prob.ravel(), minlength=code.N)


def error_probability(code: ListCode, W: Channel, budget: int = DEFAULT_BUDGET) -> CodeMetrics:
    """Exact average error probability by enumeration of the output space."""
    # per-message sums of word probabilities can round one ulp past 1
    success = min(_exact_mean(message_success(code, W, budget), code.N), 1.0)
    return CodeMetrics(p_e=1.0 - success, success=success)


def likelihood_classes(W: Channel):
    """Map each channel entry to the index of its distinct value.

    Returns ``(classes, log_values)``; log_values[0] is -inf when W has zeros.
    """
    values, classes = np.unique(W.matrix, return_inverse=True)
    with np.errstate(divide="ignore"):
        return classes.reshape(W.matrix.shape), np.log(values)


def log_likelihoods(W: Channel, codebook: np.ndarray, ys: np.ndarray, chunk: int = 1 << 21) -> np.ndarray:
    """log W^(n)_{codebook[i]}(ys[m]) as an (M, N) array.

    Each entry is sum_k count_k * log(v_k) over the distinct channel values
    v_k, accumulated in a fixed order, so codeword/word pairs with the same
    value counts get bit-identical scores and ML ties are exact.
    """
    classes, log_values = likelihood_classes(W)
    X = W.n_inputs
    N, n = codebook.shape
    onehot = np.zeros((N, n * X))
    onehot[np.arange(N)[:, None], np.arange(n) * X + codebook] = 1.0
    out = np.empty((ys.shape[0], N))
    step = max(1, chunk // max(N, 1))
    for start in range(0, ys.shape[0], step):
        y = ys[start:start + step]
        # cls[m, l*X + a] = class of W[a, y[m, l]]
        cls = classes[:, y].transpose(1, 2, 0).reshape(y.shape[0], n * X)
        acc = np.zeros((y.shape[0], N))
        dead = np.zeros((y.shape[0], N), dtype=bool)
        for k, lv in enumerate(log_values):
            counts = (cls == k).astype(float) @ onehot.T
            if np.isneginf(lv):
                dead |= counts > 0
            else:
                acc += counts * lv
        acc[dead] = -np.inf
        out[start:start + step] = acc
    return out


def ml_lists(ll: np.ndarray, L: int) -> np.ndarray:
    """Top-L columns of each row of ``ll``, ties to the smaller index, sorted."""
    order = np.argsort(-ll, axis=1, kind="stable")[:, :L]
    return np.sort(order, axis=1)


def make_list_decoder_ml(encoder: Encoder, W: Channel, L: int, budget: int = DEFAULT_BUDGET) -> ClassicalListDecoder:
    """Maximum-likelihood list decoder; minimizes P_e among all total decoders."""
    if W.is_quantum:
        raise VariantMismatch("ML list decoding is defined for classical channels only")
    encoder.check_alphabet(W)
    if not 1 <= L <= encoder.N:
        raise InvalidCode(f"list size {L} not in 1..{encoder.N}")
    n_words = W.out_dim**encoder.n
    if n_words * encoder.N > budget:
        raise BudgetExceeded(f"{n_words} words x {encoder.N} messages > budget {budget}")
    ll = log_likelihoods(W, encoder.table, words(W.out_dim, encoder.n))
    return ClassicalListDecoder(ml_lists(ll, L))


def ml_code(encoder: Encoder, W: Channel, L: int) -> ListCode:
    return ListCode(encoder, make_list_decoder_ml(encoder, W, L))


def square_root_measurement(encoder: Encoder, W: Channel) -> QuantumListDecoder:
    """Conventional (L = 1) pretty-good measurement for a cq code.

    The kernel of the averaged codeword state is assigned to message 0 so
    the POVM is complete.
    """
    if not W.is_quantum:
        raise VariantMismatch("square-root measurement needs a cq channel")
    encoder.check_alphabet(W)
    rho = [word_state(W, row) for row in encoder.table]
    w, v = eigh_psd(sum(rho))
    keep = w > 1e-12
    inv_sqrt = (v[:, keep] / np.sqrt(w[keep])) @ v[:, keep].conj().T
    elems = [inv_sqrt @ r @ inv_sqrt for r in rho]
    kernel = v[:, ~keep] @ v[:, ~keep].conj().T
    elems[0] = elems[0] + kernel
    return QuantumListDecoder(tuple(((i,), (m + m.conj().T) / 2) for i, m in enumerate(elems)))


def lift_code(base: ListCode, L: int) -> ListCode:
    """Turn a conventional code into an L-list code with N*L messages.

    Message j*L + t (t < L) reuses codeword j, and the decision region or
    POVM element of j is assigned to the block {j*L, ..., j*L + L - 1}. The
    lifted code has the same error probability as the base.
    """
    if base.L != 1:
        raise InvalidCode("lift_code needs a conventional (L = 1) base code")
    if L < 1:
        raise ValueError("list size must be positive")
    if L == 1:
        return base
    encoder = Encoder(np.repeat(base.encoder.table, L, axis=0))
    block = np.arange(L)
    if base.is_quantum:
        elems = tuple((tuple(int(j) * L + block), m) for (j,), m in base.decoder.elements)
        decoder = QuantumListDecoder(elems)
    else:
        decoder = ClassicalListDecoder(base.decoder.table[:, :1] * L + block)
    return ListCode(encoder, decoder)


@dataclass(frozen=True)
class RSTSummary:
    r_of_t: float
    s_of_t: float
    expected_s_of_t: float
    quantum_resolution_residual: float = None
    coverage_residual: float = None
    # classical: max over words of |#{i : y in Y_i} - L|
    multiplicity_residual: int = None


def build_rst(code: ListCode, W: Channel, sigma: State, budget: int = DEFAULT_BUDGET) -> RSTSummary:
    """R(T) and S(T) for the hypothesis-testing reduction of a list code.

    With R = (1/N) W^(n)_{phi(i)} and S = (1/N) sigma^n on (output, message)
    pairs and T = union of Y_i x {i}, R(T) = 1 - P_e and S(T) = L/N.
    """
    _check_code_channel(code, W)
    _check_state_for(W, sigma)
    N, L = code.N, code.L
    r_of_t = _exact_mean(message_success(code, W, budget), N)
    if code.is_quantum:
        Y = _message_projectors(code)
        sig_n = tensor_power(sigma, code.n)
        total = sum(Y)
        s_of_t = math.fsum(np.einsum("ij,ji->", sig_n, y).real for y in Y) / N
        residual = float(np.max(np.abs(total - L * np.eye(total.shape[0]))))
        return RSTSummary(r_of_t, s_of_t, L / N, quantum_resolution_residual=residual)
    table = code.decoder.table
    sig_n = tensor_power(sigma, code.n)
    s_of_t = math.fsum(np.broadcast_to(sig_n[:, None], table.shape).ravel().tolist()) / N
    # total decoder: the union of the Y_i is every output word
    coverage = abs(math.fsum(sig_n.tolist()) - 1.0)
    distinct = 1 + (np.diff(np.sort(table, axis=1), axis=1) != 0).sum(axis=1)
    return RSTSummary(
        r_of_t, s_of_t, L / N,
        coverage_residual=coverage,
        multiplicity_residual=int(np.max(np.abs(distinct - L))),
    )


class DataProcessingTerms(NamedTuple):
    """Pieces of the data-processing step at one s."""

    restricted: float  # R(T)^(1-s) S(T)^s
    two_outcome: float  # restricted + R(T^c)^(1-s) S(T^c)^s
    full: float  # sum over all (y, i) of R^(1-s) S^s


def _pow_pair(r: float, s_mass: float, s: float) -> float:
    if r <= 0:
        return 0.0
    if s_mass <= 0:
        return 0.0 if s > 0 else (math.inf if s < 0 else r)
    return math.exp((1 - s) * math.log(r) + s * math.log(s_mass))


def hypothesis_test_terms(code: ListCode, W: Channel, sigma: State, s: float,
                          budget: int = DEFAULT_BUDGET) -> DataProcessingTerms:
    """Evaluate both sides of the monotonicity step on the joint objects.

    The full sum is computed from the (output, message) distributions
    themselves (classical) or from Tr R^(1-s) S^s on the block-diagonal
    matrices (quantum), not from the per-letter factorization.
    """
    rst = build_rst(code, W, sigma, budget)
    N = code.N
    rt, st = rst.r_of_t, rst.s_of_t
    restricted = _pow_pair(rt, st, s)
    two = restricted + _pow_pair(1 - rt, 1 - st, s)
    if code.is_quantum:
        sig_n = DensityMatrix(tensor_power(sigma, code.n))
        # Tr (rho/N)^(1-s) (sig/N)^s = phi(s|rho||sig) / N
        full = math.fsum(
            math.exp(_Overlap(DensityMatrix(r), sig_n).log_phi(s)[0])
            for r in _codeword_states(code, W)
        ) / N
    else:
        ys = words(W.out_dim, code.n)
        if ys.shape[0] * N > budget:
            raise BudgetExceeded("joint (output, message) space exceeds budget")
        sig_n = tensor_power(sigma, code.n)
        cw = np.broadcast_to(code.encoder.table[None, :, :], (ys.shape[0], N, code.n))
        R = word_probabilities(W, cw, np.broadcast_to(ys[:, None, :], cw.shape)) / N
        S = np.broadcast_to((sig_n / N)[:, None], R.shape)
        full = math.fsum(_pow_pair(r, q, s) for r, q in zip(R.ravel().tolist(), S.ravel().tolist()))
    return DataProcessingTerms(restricted, two, full)


@dataclass(frozen=True)
class BoundReport:
    # rows (s, lhs, mid, rhs, margin) with mid = (1/N) sum_i prod_l phi(s|W_{x_l}||sigma)
    rows: tuple
    violated: bool

    def to_json(self) -> dict:
        return {
            "rows": [dict(zip(("s", "lhs", "mid", "rhs", "margin"), r)) for r in self.rows],
            "violated": self.violated,
        }


def verify_converse_bound(code: ListCode, W: Channel, sigma: State, s_list: Sequence[float],
                          budget: int = DEFAULT_BUDGET) -> BoundReport:
    """Check (1-P_e)^(1-s) N^-s L^s <= phi(s|W||sigma)^n for each s <= 0."""
    s_arr = np.asarray(list(s_list), dtype=float)
    if s_arr.size == 0:
        raise ValueError("need at least one s value")
    if np.any(s_arr > 0):
        raise ValueError("s values must be <= 0")
    _check_state_for(W, sigma)
    metrics = error_probability(code, W, budget)
    N, L, n = code.N, code.L, code.n
    lp_rows = log_phi_rows(s_arr, W, sigma)  # (len(s), |X|)
    letters = code.encoder.table
    rows = []
    for k, s in enumerate(s_arr):
        s = float(s)
        if metrics.success <= 0:
            lhs = 0.0
        else:
            lhs = math.exp((1 - s) * math.log(metrics.success) - s * math.log(N) + s * math.log(L))
        with np.errstate(over="ignore"):
            lp_max = lp_rows[k].max()
            rhs = math.inf if np.isinf(lp_max) else float(np.exp(n * lp_max))
            per_message = lp_rows[k][letters].sum(axis=1)
            mid = float(np.exp(per_message).mean())
        margin = rhs - lhs
        rows.append((s, lhs, mid, rhs, margin))
    violated = any(r[4] < -VIOLATION_SLACK for r in rows)
    return BoundReport(tuple(rows), violated)
