"""Random codebooks and Monte-Carlo estimates with counter-based randomness.

Every random number is a pure function of ``(seed, domain, row, column)``:
row ``t`` of a draw reads a fixed, block-aligned window of a Philox stream
keyed by ``(seed, domain)``. Chunked or parallel evaluation therefore
reproduces the sequential result exactly.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .core import Channel, ProbDist
from .codes import (
    ClassicalListDecoder,
    Encoder,
    ListCode,
    error_probability,
    log_likelihoods,
)
from .errors import VariantMismatch

DOMAIN_CODEBOOK = 1
DOMAIN_MC = 2
DOMAIN_DERANDOMIZE = 3

# rows of simulated trials processed per batch
TRIAL_BATCH = 512


def _key(seed: int, domain: int) -> np.ndarray:
    return np.random.SeedSequence([int(seed), int(domain)]).generate_state(2, np.uint64)


def counter_uniforms(seed: int, domain: int, start: int, rows: int, width: int) -> np.ndarray:
    """Uniforms U[t, j] in [0, 1) for t in [start, start + rows), j < width."""
    padded = -(-width // 4) * 4  # one Philox block yields 4 words
    bitgen = np.random.Philox(key=_key(seed, domain), counter=start * (padded // 4))
    return np.random.Generator(bitgen).random((rows, padded))[:, :width]


def inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sample indices from the rows of ``probs`` (last axis) at uniforms ``u``."""
    cdf = np.cumsum(probs, axis=-1)
    last = probs.shape[-1] - 1 - np.argmax(probs[..., ::-1] > 0, axis=-1)
    idx = (u[..., None] >= cdf).sum(axis=-1)
    return np.minimum(idx, last)


def random_code(p, n: int, N: int, seed: int) -> Encoder:
    """Codebook with i.i.d. letters drawn from p; letter (i, l) depends only on (seed, i, l)."""
    p = p if isinstance(p, ProbDist) else ProbDist(p)
    u = counter_uniforms(seed, DOMAIN_CODEBOOK, 0, N, n)
    return Encoder(inverse_cdf(np.broadcast_to(p.probs, u.shape + (p.dim,)), u))


def _sample_trials(encoder: Encoder, W: Channel, seed: int, domain: int, start: int, rows: int, extra: int = 0):
    """Messages, channel outputs and ``extra`` spare uniforms for a block of trials."""
    n, N = encoder.n, encoder.N
    u = counter_uniforms(seed, domain, start, rows, 1 + n + extra)
    msg = np.minimum((u[:, 0] * N).astype(np.int64), N - 1)
    x = encoder.table[msg]
    y = inverse_cdf(W.matrix[x], u[:, 1:1 + n])
    return msg, y, u[:, 1 + n:]


class MCEstimate(NamedTuple):
    estimate: float
    stderr: float


def mc_error_probability(encoder: Encoder, W: Channel, L: int, trials: int, seed: int) -> MCEstimate:
    """Monte-Carlo list-decoding error with an on-the-fly ML decoder.

    Each trial draws a message uniformly, passes its codeword through W and
    succeeds when the message is among the L most likely messages (ties to
    the smaller id).
    """
    if W.is_quantum:
        raise VariantMismatch("Monte-Carlo decoding is implemented for classical channels")
    encoder.check_alphabet(W)
    if trials < 1:
        raise ValueError("need at least one trial")
    ids = np.arange(encoder.N)
    errors = 0
    for start in range(0, trials, TRIAL_BATCH):
        rows = min(TRIAL_BATCH, trials - start)
        msg, y, _ = _sample_trials(encoder, W, seed, DOMAIN_MC, start, rows)
        ll = log_likelihoods(W, encoder.table, y)  # (rows, N)
        own = ll[np.arange(rows), msg][:, None]
        ahead = (ll > own) | ((ll == own) & (ids[None, :] < msg[:, None]))
        errors += int(np.count_nonzero(ahead.sum(axis=1) >= L))
    p = errors / trials
    return MCEstimate(p, math.sqrt(p * (1 - p) / trials))


class DerandomizeResult(NamedTuple):
    empirical_success: float
    predicted: float
    stderr: float


def derandomize(code: ListCode, W: Channel, trials: int, seed: int) -> DerandomizeResult:
    """Turn a list decoder into a single guess by picking a uniform list entry.

    The predicted success probability is (1 - P_e)/L; the empirical rate is
    an unbiased estimate of it.
    """
    if code.is_quantum or W.is_quantum or not isinstance(code.decoder, ClassicalListDecoder):
        raise VariantMismatch("derandomization is simulated for classical codes")
    predicted = error_probability(code, W).success / code.L
    table, L = code.decoder.table, code.L
    radix = W.out_dim ** np.arange(code.n - 1, -1, -1)
    hits = 0
    for start in range(0, trials, TRIAL_BATCH):
        rows = min(TRIAL_BATCH, trials - start)
        msg, y, spare = _sample_trials(code.encoder, W, seed, DOMAIN_DERANDOMIZE, start, rows, extra=1)
        w = y @ radix
        pick = np.minimum((spare[:, 0] * L).astype(np.int64), L - 1)
        hits += int(np.count_nonzero(table[w, pick] == msg))
    p = hits / trials
    return DerandomizeResult(p, predicted, math.sqrt(predicted * (1 - predicted) / trials))

