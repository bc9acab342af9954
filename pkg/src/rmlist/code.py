"""Reed-Muller code parameters, recursive path decomposition and encoding.

A codeword of RM(m, r) is split as ``(u, u+v)`` with ``u`` in RM(m-1, r) and
``v`` in RM(m-1, r-1).  Repeating the split until the repetition codes
RM(g, 0) or the full spaces RM(h, h) are reached gives a binary tree whose
leaves are visited depth-first, ``v`` (bit 0) before ``u`` (bit 1).  The
information block is the concatenation of the leaf blocks in that order.

Bit-index correspondence
------------------------
Position ``i`` of a length ``2**m`` word has coordinates ``(i_1, ..., i_m)``
where ``i_1`` is the most significant bit.  The split at depth ``d`` is on
axis ``d + 1``, so the left half of every sub-block is ``x_{d+1} = 0``.
Every information bit is the coefficient of one Boolean monomial: the product
of the axes on which its path took the ``v`` branch.  Inside a full-space leaf
RM(h, h) the ``2**h`` bits are ordered by continuing the same split down to
length one, so the correspondence with monomials is preserved there too.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import numpy as np

LEFT = "left"
RIGHT = "right"


class CodeParameterError(ValueError):
    """Invalid Reed-Muller parameters or an inconsistent frozen mask."""


def rm_dimension(m: int, r: int) -> int:
    return sum(comb(m, i) for i in range(min(r, m) + 1))


@dataclass(frozen=True)
class LeafPath:
    """One leaf of the recursive decomposition.

    ``bits`` holds the branch choices from the root (0 = v, 1 = u).  ``order``
    is ``g`` for a repetition leaf RM(g, 0) and ``h`` for a full-space leaf
    RM(h, h).
    """

    bits: tuple[int, ...]
    kind: str
    order: int
    info_offset: int

    @property
    def info_width(self) -> int:
        return 1 if self.kind == LEFT else 2**self.order

    @property
    def depth(self) -> int:
        return len(self.bits)

    @property
    def length(self) -> int:
        return 2**self.order

    def label(self) -> str:
        path = "".join(map(str, self.bits)) or "-"
        node = f"{{{self.order},0}}" if self.kind == LEFT else f"{{{self.order},{self.order}}}"
        return f"{path} -> {node}"


@dataclass(frozen=True)
class CodeSpec:
    m: int
    r: int
    paths: tuple[LeafPath, ...] = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return 2**self.m

    @property
    def k(self) -> int:
        return rm_dimension(self.m, self.r)

    @property
    def d(self) -> int:
        return 2 ** (self.m - self.r)

    @property
    def rate(self) -> float:
        return self.k / self.n

    def __str__(self) -> str:
        return f"RM({self.m},{self.r}) n={self.n} k={self.k} d={self.d}"


@dataclass(frozen=True)
class FrozenMask:
    """Information bits pinned to zero, by global information index."""

    k: int
    frozen: frozenset[int] = frozenset()

    def __post_init__(self):
        bad = [i for i in self.frozen if not 0 <= i < self.k]
        if bad:
            raise CodeParameterError(f"frozen indices out of range [0, {self.k}): {sorted(bad)}")
        if len(self.frozen) >= self.k:
            raise CodeParameterError("a subcode needs at least one free information bit")

    @property
    def k_sub(self) -> int:
        return self.k - len(self.frozen)

    def as_array(self) -> np.ndarray:
        out = np.zeros(self.k, dtype=np.uint8)
        out[list(self.frozen)] = 1
        return out

    def free_indices(self) -> np.ndarray:
        return np.flatnonzero(self.as_array() == 0)

    def frozen_paths(self, spec: CodeSpec) -> list[tuple[LeafPath, int]]:
        """(path, number of frozen bits on it) for every touched path."""
        out = []
        for p in spec.paths:
            hit = sum(1 for i in range(p.info_offset, p.info_offset + p.info_width) if i in self.frozen)
            if hit:
                out.append((p, hit))
        return out


def _walk(m: int, r: int, prefix: tuple[int, ...], acc: list, offset: list) -> None:
    if r == 0:
        acc.append(LeafPath(prefix, LEFT, m, offset[0]))
        offset[0] += 1
    elif r >= m:
        acc.append(LeafPath(prefix, RIGHT, m, offset[0]))
        offset[0] += 2**m
    else:
        _walk(m - 1, r - 1, prefix + (0,), acc, offset)
        _walk(m - 1, r, prefix + (1,), acc, offset)


@lru_cache(maxsize=None)
def _code_params(m: int, r: int) -> CodeSpec:
    acc: list[LeafPath] = []
    _walk(m, r, (), acc, [0])
    return CodeSpec(m, r, tuple(acc))


def code_params(m: int, r: int) -> CodeSpec:
    """Build RM(m, r) with its leaf-path table in decoding order."""
    # checked before the cache: 2.0 and True hash like 2 and 1
    if isinstance(m, bool) or isinstance(r, bool) or not isinstance(m, (int, np.integer)) \
            or not isinstance(r, (int, np.integer)):
        raise CodeParameterError(f"m and r must be integers, got {m!r}, {r!r}")
    m, r = int(m), int(r)
    if m < 1 or not 0 <= r <= m:
        raise CodeParameterError(f"need m >= 1 and 0 <= r <= m, got m={m}, r={r}")
    return _code_params(m, r)


def enumerate_paths(spec: CodeSpec) -> list[LeafPath]:
    return list(spec.paths)


def default_pruning_order(spec: CodeSpec, t: int, order: Sequence[int] | None = None) -> FrozenMask:
    """Freeze the first ``t`` information bits of the pruning order.

    The built-in order is the decoding order itself, which starts with the
    weakest path ``0^r`` followed by ``0^(r-1)10``.  ``order`` replaces it with
    an explicit list of information indices.
    """
    if t < 0 or t > spec.k - 1:
        raise CodeParameterError(f"can freeze between 0 and k-1={spec.k - 1} bits, got {t}")
    if order is None:
        order = range(spec.k)
    order = list(order)
    if len(set(order)) != len(order):
        raise CodeParameterError("pruning order repeats an index")
    if t > len(order):
        raise CodeParameterError(f"pruning order lists only {len(order)} bits, {t} requested")
    return FrozenMask(spec.k, frozenset(int(i) for i in order[:t]))


def resolve_mask(spec: CodeSpec, mask: FrozenMask | None) -> FrozenMask:
    if mask is None:
        return FrozenMask(spec.k)
    if mask.k != spec.k:
        raise CodeParameterError(f"mask built for k={mask.k}, code has k={spec.k}")
    return mask


# --- monomial bookkeeping -------------------------------------------------

def _leaf_monomials(m: int, depth: int, axes: int, h: int) -> list[int]:
    """Monomials (axis bitmasks, axis a -> bit a-1) for a full-space block."""
    if h == 0:
        return [axes]
    axis = depth + 1
    return (_leaf_monomials(m, depth + 1, axes | (1 << (axis - 1)), h - 1)
            + _leaf_monomials(m, depth + 1, axes, h - 1))


@lru_cache(maxsize=None)
def info_monomials(m: int, r: int) -> tuple[int, ...]:
    """Axis bitmask of the monomial carried by each information bit."""
    spec = code_params(m, r)
    out: list[int] = []
    for p in spec.paths:
        axes = 0
        for d, b in enumerate(p.bits):
            if b == 0:
                axes |= 1 << d
        if p.kind == LEFT:
            out.append(axes)
        else:
            out.extend(_leaf_monomials(m, p.depth, axes, p.order))
    return tuple(out)


def monomial_generator_matrix(m: int, r: int) -> np.ndarray:
    """Rows are evaluations of the monomials in information-bit order."""
    n = 2**m
    pos = np.arange(n)
    coords = np.array([(pos >> (m - a)) & 1 for a in range(1, m + 1)], dtype=np.uint8)
    rows = []
    for mono in info_monomials(m, r):
        row = np.ones(n, dtype=np.uint8)
        for a in range(m):
            if mono >> a & 1:
                row &= coords[a]
        rows.append(row)
    return np.array(rows, dtype=np.uint8)


# --- encoding -------------------------------------------------------------

def _encode_bits(m: int, r: int, a: np.ndarray) -> np.ndarray:
    if m == 0:
        return a
    if r == 0:
        return np.repeat(a[..., :1], 2**m, axis=-1)
    kv = rm_dimension(m - 1, r - 1)
    v = _encode_bits(m - 1, r - 1, a[..., :kv])
    u = _encode_bits(m - 1, min(r, m - 1), a[..., kv:])
    return np.concatenate([u, u ^ v], axis=-1)


def full_space_transform(bits: np.ndarray) -> np.ndarray:
    """Codeword of RM(h, h) for an information block of length 2**h."""
    bits = np.asarray(bits, dtype=np.uint8)
    h = int(np.log2(bits.shape[-1]))
    return _encode_bits(h, h, bits)


def full_space_inverse(code: np.ndarray) -> np.ndarray:
    code = np.asarray(code, dtype=np.uint8)
    if code.shape[-1] == 1:
        return code
    half = code.shape[-1] // 2
    u, w = code[..., :half], code[..., half:]
    return np.concatenate([full_space_inverse(u ^ w), full_space_inverse(u)], axis=-1)


def expand_info(spec: CodeSpec, mask: FrozenMask | None, info) -> np.ndarray:
    """Place ``k_sub`` free bits into a length-``k`` block (frozen bits = 0)."""
    mask = resolve_mask(spec, mask)
    info = np.asarray(info, dtype=np.uint8)
    if info.shape[-1] != mask.k_sub:
        raise CodeParameterError(f"information block has length {info.shape[-1]}, expected {mask.k_sub}")
    if info.size and info.max() > 1:
        raise CodeParameterError("information bits must be 0 or 1")
    if mask.k_sub == spec.k:
        return info
    full = np.zeros(info.shape[:-1] + (spec.k,), dtype=np.uint8)
    full[..., mask.free_indices()] = info
    return full


def encode_bits(spec: CodeSpec, mask: FrozenMask | None, info) -> np.ndarray:
    """Binary codeword(s) in {0, 1}; leading axes of ``info`` are batch axes."""
    return _encode_bits(spec.m, spec.r, expand_info(spec, mask, info))


def encode(spec: CodeSpec, mask: FrozenMask | None, info) -> np.ndarray:
    """Codeword(s) in {+1, -1} under ``a -> (-1)**a``."""
    return to_symbols(encode_bits(spec, mask, info))


def to_symbols(bits) -> np.ndarray:
    return (1 - 2 * np.asarray(bits, dtype=np.int8)).astype(np.int8)


def to_bits(symbols) -> np.ndarray:
    return (np.asarray(symbols) < 0).astype(np.uint8)


def is_codeword(spec: CodeSpec, word_bits: Iterable[int]) -> bool:
    """Membership test by re-deriving the information block recursively."""
    w = np.asarray(word_bits, dtype=np.uint8)
    return bool(np.array_equal(_encode_bits(spec.m, spec.r, _decode_exact(spec.m, spec.r, w)), w))


def _decode_exact(m: int, r: int, w: np.ndarray) -> np.ndarray:
    # inverse of _encode_bits for words that are codewords; garbage otherwise
    if m == 0:
        return w
    if r == 0:
        return w[..., :1]
    half = w.shape[-1] // 2
    u, uv = w[..., :half], w[..., half:]
    return np.concatenate([_decode_exact(m - 1, r - 1, u ^ uv),
                           _decode_exact(m - 1, min(r, m - 1), u)], axis=-1)


def extract_info(spec: CodeSpec, word_bits) -> np.ndarray:
    """Information block of a binary codeword (full code, length k)."""
    return _decode_exact(spec.m, spec.r, np.asarray(word_bits, dtype=np.uint8))
