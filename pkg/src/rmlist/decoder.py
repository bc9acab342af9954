"""Recursive soft-decision decoders for Reed-Muller codes.

``decode_basic`` follows the recursion literally: recalculate the posterior
differences for ``v``, decode it, recalculate them for ``u`` given the decided
``v``, decode ``u``.  ``decode_list`` runs the same recursion for a list of
records and keeps the ``L`` most probable information prefixes after every
leaf; it is backed by the compiled engine in :mod:`rmlist._kernel`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernel
from .code import (LEFT, CodeParameterError, CodeSpec, FrozenMask, encode, full_space_transform,
                   resolve_mask)
from .soft import EPS_CLAMP, LN2, clamp, leaf_ml_fullspace, leaf_ml_repetition

MAX_EXHAUSTIVE_BITS = 16


def _check_pair(y_left, y_right):
    y_left = np.asarray(y_left, dtype=np.float64)
    y_right = np.asarray(y_right, dtype=np.float64)
    if y_left.shape != y_right.shape:
        raise ValueError(f"halves differ in length: {y_left.shape} vs {y_right.shape}")
    return y_left, y_right


def recalc_v(y_left, y_right):
    """Posterior differences of ``v = u * uv``."""
    y_left, y_right = _check_pair(y_left, y_right)
    return y_left * y_right


def _check_v(y_left, v_hat):
    v_hat = np.asarray(v_hat, dtype=np.float64)
    if v_hat.shape != y_left.shape:
        raise ValueError(f"v_hat has shape {v_hat.shape}, halves have {y_left.shape}")
    return v_hat


def recalc_u(y_left, y_right, v_hat):
    """Posterior differences of ``u`` once ``v`` is decided as ``v_hat`` (+-1).

    Inputs are clamped first, so the denominator stays positive even for
    inputs at exactly +-1.
    """
    y_left, y_right = _check_pair(y_left, y_right)
    v_hat = _check_v(y_left, v_hat)
    a = clamp(y_left)
    y_hat = clamp(y_right * v_hat)
    return clamp((a + y_hat) / (1.0 + a * y_hat))


def recalc_u_simplified(y_left, y_right, v_hat):
    """Arithmetic-mean variant of :func:`recalc_u`."""
    y_left, y_right = _check_pair(y_left, y_right)
    v_hat = _check_v(y_left, v_hat)
    return (y_left + y_right * v_hat) / 2.0


def cost_extend(log_cost: float, y_leaf, c_leaf) -> float:
    y_leaf = np.asarray(y_leaf, dtype=np.float64)
    c_leaf = np.asarray(c_leaf, dtype=np.float64)
    if y_leaf.shape != c_leaf.shape:
        raise ValueError("leaf vector and leaf codeword differ in length")
    return float(log_cost + np.sum(np.log1p(c_leaf * y_leaf) - LN2))


@dataclass
class Record:
    info: np.ndarray
    log_cost: float
    branch: int = 0


@dataclass
class DecodeResult:
    best_info: np.ndarray
    best_codeword: np.ndarray
    best_log_cost: float
    records: list[Record] = field(default_factory=list)
    flops: int = 0

    @property
    def list(self) -> list[Record]:
        return self.records


# --- basic recursive decoder ---------------------------------------------

class _Counter:
    __slots__ = ("n",)

    def __init__(self):
        self.n = 0


def _basic(m, r, y, frozen, off, exact, counter):
    """Returns (info bits, codeword bits, log cost)."""
    N = y.size
    if r == 0:
        # metric of the leaf plus the comparison of its two words
        counter.n += N + 1
        bits, costs = leaf_ml_repetition(y)
        a = 1 if (not frozen[off] and costs[1] > costs[0]) else 0
        return np.array([a], np.uint8), np.full(N, a, np.uint8), float(costs[a])
    if r >= m:
        counter.n += N
        fz = frozen[off:off + N]
        info, cost = leaf_ml_fullspace(y, branch=1, frozen=fz if fz.any() else None)[0]
        return np.asarray(info, np.uint8), full_space_transform(info), cost
    half = N // 2
    y1, y2 = y[:half], y[half:]
    yv = recalc_v(y1, y2)
    counter.n += half
    kv = _dim(m - 1, r - 1)
    av, cv, cost_v = _basic(m - 1, r - 1, yv, frozen, off, exact, counter)
    v_hat = 1.0 - 2.0 * cv
    yu = recalc_u(y1, y2, v_hat) if exact else recalc_u_simplified(y1, y2, v_hat)
    counter.n += 5 * half
    au, cu, cost_u = _basic(m - 1, r, yu, frozen, off + kv, exact, counter)
    return np.concatenate([av, au]), np.concatenate([cu, cu ^ cv]), cost_v + cost_u


@lru_cache(maxsize=None)
def _dim(m, r):
    from .code import rm_dimension
    return rm_dimension(m, r)


def _prepare_input(spec: CodeSpec, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (spec.n,):
        raise ValueError(f"soft vector has shape {y.shape}, expected ({spec.n},)")
    return np.clip(y, -1.0 + EPS_CLAMP, 1.0 - EPS_CLAMP)


def _sub_info(mask: FrozenMask, info: np.ndarray) -> np.ndarray:
    if mask.k_sub == mask.k:
        return info
    return info[..., mask.free_indices()]


def decode_basic(spec: CodeSpec, mask: FrozenMask | None, y, variant: str = "exact") -> DecodeResult:
    """Single-path recursive decoding with ML decisions at the leaves.

    ``variant="simplified"`` replaces the exact ``u`` recalculation by the
    arithmetic mean, for comparison.  The log-cost is the accumulated leaf
    cost, which for the exact variant is log P(codeword | y).
    """
    if variant not in ("exact", "simplified"):
        raise ValueError(f"unknown variant {variant!r}")
    mask = resolve_mask(spec, mask)
    y = _prepare_input(spec, y)
    counter = _Counter()
    info, code, cost = _basic(spec.m, spec.r, y, mask.as_array(), 0, variant == "exact", counter)
    info_sub = _sub_info(mask, info)
    rec = Record(info_sub, cost)
    return DecodeResult(info_sub, encode(spec, mask, info_sub), cost, [rec], counter.n)


# --- list decoder ---------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    depth: np.ndarray
    kind: np.ndarray
    off: np.ndarray
    width: np.ndarray
    ustart: np.ndarray
    bits: np.ndarray


@lru_cache(maxsize=None)
def schedule(spec: CodeSpec) -> Schedule:
    S = len(spec.paths)
    bits = np.zeros((S, max(spec.m, 1)), np.int64)
    ustart = np.full(S, -1, np.int64)
    for s, p in enumerate(spec.paths):
        bits[s, :p.depth] = p.bits
        if s:
            prev = spec.paths[s - 1].bits
            j = next(i for i, (a, b) in enumerate(zip(prev, p.bits)) if a != b)
            ustart[s] = j
    return Schedule(
        depth=np.array([p.depth for p in spec.paths], np.int64),
        kind=np.array([0 if p.kind == LEFT else 1 for p in spec.paths], np.int64),
        off=np.array([p.info_offset for p in spec.paths], np.int64),
        width=np.array([p.info_width for p in spec.paths], np.int64),
        ustart=ustart,
        bits=bits,
    )


def _leaf_choices(spec: CodeSpec, frozen: np.ndarray, branch: int) -> list[int]:
    out = []
    for p in spec.paths:
        fz = frozen[p.info_offset:p.info_offset + p.info_width]
        free = int(p.info_width - fz.sum())
        if p.kind == LEFT:
            out.append(2 if free else 1)
            continue
        if fz.any() or branch == 0:
            if free > MAX_EXHAUSTIVE_BITS:
                raise CodeParameterError(
                    f"exhaustive search over a {free}-bit leaf block exceeds {MAX_EXHAUSTIVE_BITS} bits")
        out.append(2**free if branch == 0 else min(branch, 2**free))
    return out


def candidate_capacity(spec: CodeSpec, frozen: np.ndarray, branch: int, L: int, roots: int = 1) -> int:
    nrec, cmax = roots, 1
    for b in _leaf_choices(spec, frozen, branch):
        b = min(b, max(L, 2))
        cmax = max(cmax, nrec * b)
        nrec = min(L, nrec * b)
    return cmax


def _validate_list_args(L: int, branch: int) -> None:
    if int(L) < 1:
        raise ValueError(f"list size must be >= 1, got {L}")
    if branch not in (0, 1, 2, 4):
        raise ValueError(f"branch must be 2, 4 (or 0 for exhaustive), got {branch}")


_IDENTITY_ZOB = np.zeros((1, 2), np.uint64)


def kernel_args(spec: CodeSpec, mask: FrozenMask, L: int, branch: int,
                perm_map: np.ndarray | None = None, zob: np.ndarray | None = None):
    """Positional arguments for the compiled engine after the input array."""
    sched = schedule(spec)
    frozen = mask.as_array()
    roots = 1 if perm_map is None else perm_map.shape[0]
    if perm_map is None:
        perm_map = np.arange(spec.k, dtype=np.int64)[None, :]
    dedup = roots > 1
    if zob is None:
        zob = _IDENTITY_ZOB
    cmax = candidate_capacity(spec, frozen, branch, L, roots)
    return (spec.m, int(L), int(branch), sched.depth, sched.kind, sched.off, sched.width,
            sched.ustart, sched.bits, frozen, perm_map, zob, dedup, cmax)


def decode_list(spec: CodeSpec, mask: FrozenMask | None, y, L: int, branch: int = 4) -> DecodeResult:
    """List decoding with ``L`` surviving records after every leaf.

    ``branch`` is the number of words tried at a full-space leaf: 2, 4, or 0
    for every word of the leaf code (exhaustive, small leaves only).
    """
    _validate_list_args(L, branch)
    mask = resolve_mask(spec, mask)
    y = _prepare_input(spec, y)
    info, cost, _, nrec, flops = _kernel.run_list(y[None, :], *kernel_args(spec, mask, L, branch))
    return _result(spec, mask, info, cost, np.zeros(nrec, np.int64), flops)


def _result(spec, mask, info, cost, branches, flops) -> DecodeResult:
    info_sub = _sub_info(mask, info)
    records = [Record(info_sub[j].copy(), float(cost[j]), int(branches[j])) for j in range(len(cost))]
    best = records[0]
    return DecodeResult(best.info, encode(spec, mask, best.info), best.log_cost, records, int(flops))


def decode_list_batch(spec: CodeSpec, mask: FrozenMask | None, Y, L: int, branch: int = 4):
    """Best information blocks (``k_sub`` bits), log-costs and flop counts for a batch."""
    _validate_list_args(L, branch)
    mask = resolve_mask(spec, mask)
    Y = np.clip(np.asarray(Y, dtype=np.float64), -1.0 + EPS_CLAMP, 1.0 - EPS_CLAMP)
    if Y.ndim != 2 or Y.shape[1] != spec.n:
        raise ValueError(f"batch must have shape (B, {spec.n}), got {Y.shape}")
    info, cost, flops = _kernel.run_batch(Y[:, None, :], *kernel_args(spec, mask, L, branch))
    return _sub_info(mask, info), cost, flops
