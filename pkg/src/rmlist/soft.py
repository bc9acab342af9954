"""Channels, posterior differences and maximum-likelihood decoding of leaf codes.

The decoder works on *posterior differences* ``y_i = 2 Pr{c_i = +1 | x_i} - 1``.
A symbol ``c_i = +-1`` then has posterior ``(1 + c_i y_i) / 2`` and a word has
the product of those, which is kept in the natural-log domain throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .code import full_space_inverse, full_space_transform

EPS_CLAMP = 1e-12
LN2 = float(np.log(2.0))


def clamp(y):
    return np.clip(y, -1.0 + EPS_CLAMP, 1.0 - EPS_CLAMP)


def symbol_log_posteriors(y):
    """``(log Pr{+1|y}, log Pr{-1|y})`` per position."""
    y = np.asarray(y, dtype=np.float64)
    return np.log1p(y) - LN2, np.log1p(-y) - LN2


def word_log_posterior(y, c):
    """log P(c | y) for +-1 word(s) ``c``; broadcasts over leading axes.

    A word that contradicts a certain symbol (``y_i = -c_i = +-1``) gets ``-inf``.
    """
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.sum(np.log1p(np.asarray(c) * y) - LN2, axis=-1)


@dataclass(frozen=True)
class ChannelModel:
    """Memoryless binary-input channel.

    ``kind`` is ``"awgn"`` (``sigma2`` = noise variance per +-1 symbol) or
    ``"bsc"`` (``p`` = crossover probability).
    """

    kind: str
    sigma2: float = 1.0
    p: float = 0.0

    def __post_init__(self):
        if self.kind == "awgn":
            if not self.sigma2 > 0:
                raise ValueError(f"AWGN noise variance must be positive, got {self.sigma2}")
        elif self.kind == "bsc":
            if not 0 < self.p < 0.5:
                raise ValueError(f"BSC crossover must be in (0, 1/2), got {self.p}")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    @classmethod
    def awgn(cls, sigma2: float) -> "ChannelModel":
        return cls("awgn", sigma2=float(sigma2))

    @classmethod
    def awgn_ebn0(cls, snr_db: float, rate: float) -> "ChannelModel":
        """AWGN at ``Eb/N0 = snr_db`` per information bit for unit symbol energy."""
        return cls.awgn(awgn_sigma2(snr_db, rate))

    @classmethod
    def bsc(cls, p: float) -> "ChannelModel":
        return cls("bsc", p=float(p))

    def snr_db_per_info_bit(self, rate: float) -> float:
        if self.kind != "awgn":
            raise ValueError("Eb/N0 is defined for the AWGN channel only")
        return float(10 * np.log10(1.0 / (2.0 * rate * self.sigma2)))


def awgn_sigma2(snr_db: float, rate: float) -> float:
    return 1.0 / (2.0 * rate * 10.0 ** (snr_db / 10.0))


def transmit(codeword, channel: ChannelModel, rng: np.random.Generator) -> np.ndarray:
    c = np.asarray(codeword, dtype=np.float64)
    if channel.kind == "awgn":
        return c + np.sqrt(channel.sigma2) * rng.standard_normal(c.shape)
    flips = rng.random(c.shape) < channel.p
    return np.where(flips, -c, c)


def posteriors(x, channel: ChannelModel) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if channel.kind == "awgn":
        y = np.tanh(x / channel.sigma2)
    else:
        y = np.where(x >= 0, 1.0 - 2.0 * channel.p, -(1.0 - 2.0 * channel.p))
    return clamp(y)


# --- leaf decoders (reference implementations) ----------------------------

def leaf_ml_repetition(y):
    """Both words of the repetition code with their log posteriors.

    Returns ``(bits, log_costs)`` with ``bits = (0, 1)``; ``a = 0`` is the
    all-(+1) word.
    """
    lp, lq = symbol_log_posteriors(y)
    return (0, 1), np.array([lp.sum(), lq.sum()])


def leaf_ml_fullspace(y, branch: int = 2, frozen=None):
    """Best words of the full space RM(h, h) as ``[(info_block, log_cost), ...]``.

    ``branch`` words are returned (2, 4, or 0 for all of them), best first.
    Ties keep the enumeration order, in which the hard-decision word comes
    first.  ``frozen`` optionally marks information bits pinned to zero, in
    which case the surviving subcode is searched exhaustively.
    """
    y = np.asarray(y, dtype=np.float64)
    N = y.size
    lp, lq = symbol_log_posteriors(y)
    if frozen is not None and np.any(frozen):
        free = np.flatnonzero(np.asarray(frozen) == 0)
        combos = np.zeros((2 ** free.size, N), dtype=np.uint8)
        for j in range(2 ** free.size):
            for t, pos in enumerate(free):
                combos[j, pos] = (j >> (free.size - 1 - t)) & 1
        words = full_space_transform(combos)
        costs = np.where(words == 0, lp, lq).sum(axis=1)
        order = np.argsort(-costs, kind="stable")
        keep = order if branch == 0 else order[:branch]
        return [(combos[j], float(costs[j])) for j in keep]

    hard = (y < 0).astype(np.uint8)
    best = np.where(hard == 0, lp, lq)
    delta = np.abs(lp - lq)
    total = 2**N if branch == 0 else min(branch, 2**N)
    t = N if branch == 0 else min(branch, N)
    weakest = np.argsort(np.abs(y), kind="stable")[:t]
    cands = []
    for size in range(t + 1):
        for subset in combinations(range(t), size):
            cands.append((float(best.sum() - delta[weakest[list(subset)]].sum()), subset))
    # enumeration order matches the compiled kernel: increasing bitmask
    cands.sort(key=lambda cs: sum(1 << i for i in cs[1]))
    cands = sorted(cands, key=lambda cs: -cs[0])[:total]
    out = []
    for cost, subset in cands:
        word = hard.copy()
        word[weakest[list(subset)]] ^= 1
        out.append((full_space_inverse(word), cost))
    return out
