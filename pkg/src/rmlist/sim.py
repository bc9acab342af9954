"""Monte Carlo word-error-rate estimation for the recursive decoders.

Trials are grouped in fixed-size batches.  Batch ``b`` at a given SNR draws
everything (information blocks and noise) from its own random stream derived
from ``(seed, snr, b)``, and the stop rule is evaluated after each batch in
batch order.  Results therefore do not depend on how many worker processes
share the batches.

Besides the decoder's errors, every point records how often the decoded word
was strictly more probable than the transmitted one.  An ML decoder would
have failed on each of those trials too, so their rate is a lower bound on
the ML word error rate.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.stats import beta

from .code import (CodeParameterError, CodeSpec, FrozenMask, code_params, default_pruning_order, encode,
                   encode_bits, resolve_mask)
from .decoder import DecodeResult, decode_basic, decode_list_batch
from .perm import build_perm_set, decode_perm_batch
from .soft import ChannelModel, posteriors, transmit, word_log_posterior

DECODERS = ("basic", "list", "perm")
MAX_BRUTEFORCE_BITS = 20
CSV_COLUMNS = ("snr_db", "trials", "errors", "wer", "ci_low", "ci_high", "ml_lb_wer", "mean_flops")


@dataclass(frozen=True)
class DecoderConfig:
    kind: str = "list"
    L: int = 16
    branch: int = 4
    l: int = 16

    def __post_init__(self):
        if self.kind not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}, got {self.kind!r}")
        if self.L < 1 or self.l < 1:
            raise ValueError("list sizes must be >= 1")
        if self.branch not in (0, 2, 4):
            raise ValueError(f"branch must be 2, 4 or 0, got {self.branch}")

    def label(self) -> str:
        if self.kind == "list":
            return f"list(L={self.L},branch={self.branch})"
        if self.kind == "perm":
            return f"perm(l={self.l},branch={self.branch})"
        return "basic"


@dataclass(frozen=True)
class SimConfig:
    m: int
    r: int
    snr_points_db: tuple[float, ...]
    decoder: DecoderConfig = DecoderConfig()
    prune: int = 0
    min_word_errors: int = 100
    max_trials: int = 1_000_000
    seed: int = 0
    workers: int = 1
    batch_size: int = 256

    def __post_init__(self):
        object.__setattr__(self, "snr_points_db", tuple(float(s) for s in self.snr_points_db))
        if not self.snr_points_db:
            raise ValueError("at least one SNR point is required")
        if not all(math.isfinite(s) for s in self.snr_points_db):
            raise ValueError("SNR points must be finite")
        if self.min_word_errors < 1:
            raise ValueError("min_word_errors must be >= 1")
        if self.max_trials < 1 or self.batch_size < 1 or self.workers < 1:
            raise ValueError("max_trials, batch_size and workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        self.mask  # validates (m, r, prune)
        if self.decoder.kind == "perm" and self.prune:
            raise ValueError("the permutation decoder works on full codes only")

    @property
    def spec(self) -> CodeSpec:
        return code_params(self.m, self.r)

    @property
    def mask(self) -> FrozenMask:
        return default_pruning_order(self.spec, self.prune)

    @property
    def rate(self) -> float:
        return self.mask.k_sub / self.spec.n

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_points_db"] = list(self.snr_points_db)
        d["n"] = self.spec.n
        d["k"] = self.spec.k
        d["k_sub"] = self.mask.k_sub
        return d


@dataclass(frozen=True)
class WerPoint:
    snr_db: float
    trials: int
    word_errors: int
    wer_ci95: tuple[float, float]
    ml_lb_errors: int
    mean_flops: float

    @property
    def wer(self) -> float:
        return self.word_errors / self.trials

    @property
    def ml_lb_wer(self) -> float:
        return self.ml_lb_errors / self.trials

    @property
    def solid(self) -> bool:
        return self.word_errors >= 20

    def row(self) -> dict:
        return {"snr_db": self.snr_db, "trials": self.trials, "errors": self.word_errors,
                "wer": self.wer, "ci_low": self.wer_ci95[0], "ci_high": self.wer_ci95[1],
                "ml_lb_wer": self.ml_lb_wer, "mean_flops": self.mean_flops}


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    if n <= 0 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n and n > 0, got k={k}, n={n}")
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


# --- one batch of trials ----------------------------------------------------

def _snr_key(snr_db: float) -> int:
    return int(np.float64(snr_db).view(np.uint64))


def batch_rng(seed: int, snr_db: float, batch: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=(int(seed), _snr_key(snr_db)), spawn_key=(int(batch),))
    return np.random.default_rng(ss)


def decode_batch(spec: CodeSpec, mask: FrozenMask, dec: DecoderConfig, Y: np.ndarray):
    """(info blocks, flop counts) of the configured decoder for a batch of soft vectors."""
    if dec.kind == "list":
        info, _, flops = decode_list_batch(spec, mask, Y, dec.L, dec.branch)
    elif dec.kind == "perm":
        info, _, flops = decode_perm_batch(spec, Y, dec.l, build_perm_set(spec.m, spec.r), dec.branch)
    else:
        res = [decode_basic(spec, mask, y) for y in Y]
        info = np.array([x.best_info for x in res], dtype=np.uint8)
        flops = np.array([x.flops for x in res], dtype=np.int64)
    return info, flops


@dataclass
class BatchOutcome:
    """Per-trial record of one batch (kept for replay and oracle checks)."""

    info: np.ndarray
    y: np.ndarray
    decoded: np.ndarray
    errors: np.ndarray
    ml_lb: np.ndarray
    flops: np.ndarray


def trial_outcomes(config: SimConfig, snr_db: float, b: int, size: int) -> BatchOutcome:
    spec, mask = config.spec, config.mask
    rng = batch_rng(config.seed, snr_db, b)
    channel = ChannelModel.awgn_ebn0(snr_db, config.rate)
    info = rng.integers(0, 2, size=(size, mask.k_sub), dtype=np.uint8)
    c = encode(spec, mask, info)
    y = posteriors(transmit(c, channel, rng), channel)
    dec_info, flops = decode_batch(spec, mask, config.decoder, y)
    err = np.any(dec_info != info, axis=1)
    c_hat = encode(spec, mask, dec_info)
    lb = err & (word_log_posterior(y, c_hat) > word_log_posterior(y, c))
    return BatchOutcome(info, y, dec_info, err, lb, flops)


def _run_batch(config: SimConfig, snr_db: float, b: int, size: int):
    out = trial_outcomes(config, snr_db, b, size)
    return int(out.errors.sum()), int(out.ml_lb.sum()), int(out.flops.sum())


def batch_plan(config: SimConfig):
    """``(batch index, size)`` pairs in the order the stop rule sees them."""
    b, done = 0, 0
    while done < config.max_trials:
        size = min(config.batch_size, config.max_trials - done)
        yield b, size
        b += 1
        done += size


def run_point(config: SimConfig, snr_db: float, pool: ProcessPoolExecutor | None = None) -> WerPoint:
    """Simulate one SNR point until ``min_word_errors`` errors or ``max_trials`` trials."""
    trials = errors = lb = flops = 0
    sizes = batch_plan(config)
    done = False
    while not done:
        wave = [bs for _, bs in zip(range(config.workers), sizes)]
        if not wave:
            break
        if pool is None:
            results = (_run_batch(config, snr_db, b, s) for b, s in wave)
        else:
            results = pool.map(_run_batch, *zip(*[(config, snr_db, b, s) for b, s in wave]))
        for (_, size), (e, l, f) in zip(wave, results):
            trials += size
            errors += e
            lb += l
            flops += f
            if errors >= config.min_word_errors:
                done = True
                break
    return WerPoint(float(snr_db), trials, errors, clopper_pearson(errors, trials), lb, flops / trials)


def sweep(config: SimConfig, out: str | Path | None = None, fmt: str = "csv") -> list[WerPoint]:
    """Run every SNR point; optionally write the table to ``out``."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            points = [run_point(config, s, pool) for s in config.snr_points_db]
    else:
        points = [run_point(config, s) for s in config.snr_points_db]
    if out is not None:
        text = to_csv(points) if fmt == "csv" else to_json(points, config)
        path = Path(out)
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write results to {path}: {exc.strerror}") from exc
    return points


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def to_csv(points: list[WerPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        row = p.row()
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


_FLOAT_TAG = "\x00f17:"


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _FLOAT_TAG + _fmt(obj)
    return obj


def to_json(points: list[WerPoint], config: SimConfig) -> str:
    payload = {"config": config.to_dict(), "points": [p.row() for p in points]}
    text = json.dumps(_json_ready(payload), indent=2)
    # floats travel as tagged strings so they keep exactly 17 significant digits
    text = re.sub(r'"\\u0000f17:([^"]*)"', r"\1", text)
    return text + "\n"


def snr_at_wer(points: list[WerPoint], target: float) -> float:
    """SNR where the WER curve crosses ``target`` (log-linear interpolation)."""
    pts = sorted(points, key=lambda p: p.snr_db)
    for a, b in zip(pts, pts[1:]):
        if a.wer >= target >= b.wer and a.wer > 0 and b.wer > 0:
            la, lb_ = math.log(a.wer), math.log(b.wer)
            if la == lb_:
                return a.snr_db
            return a.snr_db + (la - math.log(target)) / (la - lb_) * (b.snr_db - a.snr_db)
    raise ValueError(f"WER target {target} is not bracketed by the simulated points")


# --- oracle and accounting --------------------------------------------------

def ml_bruteforce(spec: CodeSpec, mask: FrozenMask | None, y, chunk: int = 1 << 12):
    """Exhaustive maximum-posterior codeword as ``(info, codeword, log_cost)``.

    Ties go to the lexicographically smallest information block.
    """
    mask = resolve_mask(spec, mask)
    if mask.k_sub > MAX_BRUTEFORCE_BITS:
        raise CodeParameterError(f"brute force over 2**{mask.k_sub} codewords exceeds the "
                                 f"2**{MAX_BRUTEFORCE_BITS} limit")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (spec.n,):
        raise ValueError(f"soft vector has shape {y.shape}, expected ({spec.n},)")
    k = mask.k_sub
    shifts = np.arange(k - 1, -1, -1)
    best_idx, best_cost = -1, -np.inf
    for start in range(0, 2**k, chunk):
        idx = np.arange(start, min(start + chunk, 2**k))
        info = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
        costs = word_log_posterior(y, 1 - 2 * encode_bits(spec, mask, info).astype(np.int8))
        j = int(np.argmax(costs))
        if costs[j] > best_cost:
            best_idx, best_cost = start + j, float(costs[j])
    info = ((best_idx >> shifts) & 1).astype(np.uint8)
    return info, encode(spec, mask, info), best_cost


def flop_report(result: DecodeResult) -> int:
    return int(result.flops)


def basic_flop_bound(m: int, r: int) -> int:
    n = 2**m
    return 6 * n * min(r, m - r) + n
