"""Axis permutations of RM codes and the permutation list decoder.

Positions are points ``(i_1, ..., i_m)`` of the binary cube, ``i_1`` being the
most significant bit.  Any permutation of the ``m`` axes maps every RM code
onto itself.  Two permutations that send the same ``r`` axes to the front
behave alike for the decoder, so one representative per ``r``-subset is used.
The decoder runs the list recursion on every permuted copy of the input at
once and merges the lists after each leaf, counting every information block
only once.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from . import _kernel
from .code import CodeParameterError, CodeSpec, FrozenMask, code_params, info_monomials
from .soft import clamp
from .decoder import DecodeResult, _prepare_input, _result, _validate_list_args, kernel_args

ZOBRIST_SEED = 0x5EED_C0DE


@dataclass(frozen=True)
class AxisPerm:
    """New axis ``t + 1`` reads old axis ``pi[t]`` (axes numbered from 1)."""

    pi: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.pi)

    @property
    def pos_map(self) -> np.ndarray:
        """``pos_map[i]`` is the new index of original position ``i``."""
        return _pos_map(self.pi)

    @property
    def inverse(self) -> np.ndarray:
        return np.argsort(self.pos_map)

    def is_identity(self) -> bool:
        return self.pi == tuple(range(1, self.m + 1))

    def relabel(self, mono: int) -> int:
        """Monomial over the new axes (bitmask) written over the old axes."""
        out = 0
        for t, a in enumerate(self.pi):
            if mono >> t & 1:
                out |= 1 << (a - 1)
        return out


@lru_cache(maxsize=None)
def _pos_map(pi: tuple[int, ...]) -> np.ndarray:
    m = len(pi)
    i = np.arange(2**m)
    j = np.zeros_like(i)
    for t, a in enumerate(pi):
        j |= ((i >> (m - a)) & 1) << (m - 1 - t)
    j.setflags(write=False)
    return j


@dataclass(frozen=True)
class PermSet:
    m: int
    r: int
    reps: tuple[AxisPerm, ...]

    def __len__(self) -> int:
        return len(self.reps)

    def __iter__(self):
        return iter(self.reps)

    def subsets(self) -> list[frozenset[int]]:
        """The old axes sent to the first ``r`` positions, per representative."""
        return [frozenset(p.pi[:self.r]) for p in self.reps]


@lru_cache(maxsize=None)
def build_perm_set(m: int, r: int) -> PermSet:
    """One axis permutation per ``r``-subset of axes, identity first.

    The subset ``S`` is moved onto axes ``1..r`` and its complement onto the
    rest, both in ascending order.
    """
    if not isinstance(m, (int, np.integer)) or not isinstance(r, (int, np.integer)) or not 0 < r < m:
        raise CodeParameterError(f"permutation sets need 0 < r < m, got m={m}, r={r}")
    axes = range(1, m + 1)
    reps = []
    for S in combinations(axes, r):
        rest = [a for a in axes if a not in S]
        reps.append(AxisPerm(tuple(S) + tuple(rest)))
    assert len(reps) == comb(m, r)
    return PermSet(int(m), int(r), tuple(reps))


def permute_soft(y, perm: AxisPerm, direction: str = "forward") -> np.ndarray:
    y = np.asarray(y)
    if y.shape[-1] != 2**perm.m:
        raise ValueError(f"vector length {y.shape[-1]} does not match 2**{perm.m}")
    pm = perm.pos_map
    if direction == "forward":
        out = np.empty_like(y)
        out[..., pm] = y
        return out
    if direction == "inverse":
        return y[..., pm]
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def info_map(spec: CodeSpec, perm: AxisPerm) -> np.ndarray:
    """``out[j]``: original information index of bit ``j`` decoded in the permuted frame."""
    monos = info_monomials(spec.m, spec.r)
    where = {mono: j for j, mono in enumerate(monos)}
    return np.array([where[perm.relabel(mono)] for mono in monos], dtype=np.int64)


@lru_cache(maxsize=None)
def _perm_tables(m: int, r: int, pi_list: tuple[tuple[int, ...], ...]):
    spec = code_params(m, r)
    perm_map = np.stack([info_map(spec, AxisPerm(pi)) for pi in pi_list])
    rng = np.random.default_rng(ZOBRIST_SEED)
    zob = rng.integers(0, np.iinfo(np.uint64).max, size=(spec.k, 2), dtype=np.uint64, endpoint=True)
    pos = np.stack([_pos_map(pi) for pi in pi_list])
    return perm_map, zob, pos


def _check_perms(spec: CodeSpec, perms: PermSet | None) -> PermSet:
    if perms is None:
        return build_perm_set(spec.m, spec.r)
    if perms.m != spec.m or any(p.m != spec.m for p in perms):
        raise CodeParameterError(f"permutation set built for m={perms.m}, code has m={spec.m}")
    if len(perms) == 0:
        raise CodeParameterError("empty permutation set")
    return perms


def permuted_inputs(spec: CodeSpec, perms: PermSet, Y) -> np.ndarray:
    """Stack ``(..., T, n)`` of the permuted copies of ``Y`` (shape ``(..., n)``)."""
    _, _, pos = _perm_tables(spec.m, spec.r, tuple(p.pi for p in perms))
    Y = np.asarray(Y)
    out = np.empty(Y.shape[:-1] + (len(perms), spec.n), dtype=Y.dtype)
    for t in range(len(perms)):
        out[..., t, pos[t]] = Y
    return out


def decode_perm(spec: CodeSpec, y, l: int, perms: PermSet | None = None, branch: int = 4) -> DecodeResult:
    """List decoding over all permuted copies of ``y`` with one merged list of size ``l``.

    Every representative starts with one record.  After each leaf the
    candidates of all copies are pooled, copies of the same information
    block are merged (the more probable one survives, equal costs go to the
    earlier representative) and the best ``l`` are kept.  The returned
    information block and codeword are in the original coordinates;
    ``Record.branch`` names the representative that produced a record.
    """
    _validate_list_args(l, branch)
    perms = _check_perms(spec, perms)
    y = _prepare_input(spec, y)
    perm_map, zob, _ = _perm_tables(spec.m, spec.r, tuple(p.pi for p in perms))
    roots = permuted_inputs(spec, perms, y)
    mask = FrozenMask(spec.k)
    info, cost, br, nrec, flops = _kernel.run_list(roots, *kernel_args(spec, mask, l, branch, perm_map, zob))
    return _result(spec, mask, info, cost, br, flops)


def decode_perm_batch(spec: CodeSpec, Y, l: int, perms: PermSet | None = None, branch: int = 4):
    """Best information blocks, log-costs and flop counts for a batch ``(B, n)``."""
    _validate_list_args(l, branch)
    perms = _check_perms(spec, perms)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[1] != spec.n:
        raise ValueError(f"batch must have shape (B, {spec.n}), got {Y.shape}")
    Y = clamp(Y)
    perm_map, zob, _ = _perm_tables(spec.m, spec.r, tuple(p.pi for p in perms))
    roots = np.ascontiguousarray(permuted_inputs(spec, perms, Y))
    mask = FrozenMask(spec.k)
    return _kernel.run_batch(roots, *kernel_args(spec, mask, l, branch, perm_map, zob))
