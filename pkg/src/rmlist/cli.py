"""Command-line driver: ``rmlist {info,encode,decode,ml-bruteforce,simulate}``.

Exit status is 0 on success, 2 for usage or parameter errors and 1 for
runtime failures.  Errors go to standard error as one JSON object per line.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .code import LEFT, CodeParameterError, code_params, default_pruning_order, encode
from .decoder import decode_basic, decode_list
from .perm import build_perm_set, decode_perm
from .sim import DecoderConfig, SimConfig, ml_bruteforce, sweep, to_csv, to_json

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class UsageError(Exception):
    pass


# --- config files -----------------------------------------------------------

CONFIG_KEYS = {
    "code": {"m", "r", "prune"},
    "decoder": {"kind", "L", "l", "branch"},
    "channel": {"snr_db", "snr_range"},
    "run": {"seed", "workers", "min_errors", "max_trials", "batch_size"},
    "output": {"out", "format"},
}


def load_config(path: str | Path) -> dict:
    """Read a TOML run description; any key outside the schema is an error."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"cannot parse {path}: {exc}")
    return check_config(data)


def check_config(data: dict) -> dict:
    for section, body in data.items():
        if section not in CONFIG_KEYS:
            raise UsageError(f"unknown config key '{section}'")
        if not isinstance(body, dict):
            raise UsageError(f"config key '{section}' must be a table")
        for key in body:
            if key not in CONFIG_KEYS[section]:
                raise UsageError(f"unknown config key '{section}.{key}'")
    return data


def recipe_path(name: str) -> Path:
    stem = name[:-5] if name.endswith(".toml") else name
    p = resources.files("rmlist") / "recipes" / f"{stem}.toml"
    if not p.is_file():
        raise UsageError(f"no bundled recipe named '{stem}' (see 'rmlist recipes')")
    return Path(str(p))


def list_recipes() -> list[str]:
    root = resources.files("rmlist") / "recipes"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


# --- shared helpers ---------------------------------------------------------

def parse_snr_range(text: str) -> list[float]:
    """``start:stop:step`` with ``stop`` included."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"--snr-range expects start:stop:step, got '{text}'")
    return snr_grid(start, stop, step)


def snr_grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0 or stop < start:
        raise UsageError("SNR range needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def read_soft_vector(path: str) -> np.ndarray:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise RuntimeError(f"cannot read {path}: {exc.strerror}")
    tokens = text.replace(",", " ").split()
    try:
        y = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise UsageError(f"malformed soft vector in {path}: {exc}")
    if y.size and (not np.all(np.isfinite(y)) or np.abs(y).max() > 1):
        raise UsageError(f"soft vector entries must lie in [-1, 1] ({path})")
    return y


def bits_to_hex(bits) -> str:
    bits = [int(b) for b in bits]
    pad = (-len(bits)) % 4
    s = "".join(map(str, [0] * pad + bits))
    return "".join(f"{int(s[i:i + 4], 2):x}" for i in range(0, len(s), 4))


def _spec_and_mask(args):
    spec = code_params(args.m, args.r)
    return spec, default_pruning_order(spec, args.prune)


def _print_decision(info, log_cost, flops=None, out=None):
    out = out or sys.stdout
    print(f"info_hex={bits_to_hex(info)}", file=out)
    print(f"info_bits={''.join(str(int(b)) for b in info)}", file=out)
    print(f"log_cost={log_cost:.17g}", file=out)
    if flops is not None:
        print(f"flops={flops}", file=out)


# --- subcommands ------------------------------------------------------------

def cmd_info(args) -> int:
    spec, mask = _spec_and_mask(args)
    print(f"RM({spec.m},{spec.r}) n={spec.n} k={spec.k} d={spec.d}")
    if args.prune:
        print(f"k_sub={mask.k_sub} frozen_bits={len(mask.frozen)}")
    print(f"{'#':>4} {'path':<12} {'leaf':<8} {'width':>5} {'offset':>6}" + ("  frozen" if args.prune else ""))
    hit = {p: h for p, h in mask.frozen_paths(spec)}
    for i, p in enumerate(spec.paths):
        path = "".join(map(str, p.bits)) or "-"
        leaf = f"{{{p.order},0}}" if p.kind == LEFT else f"{{{p.order},{p.order}}}"
        line = f"{i:>4} {path:<12} {leaf:<8} {p.info_width:>5} {p.info_offset:>6}"
        if args.prune:
            line += f"  {hit.get(p, 0)}"
        print(line)
    return 0


def cmd_encode(args) -> int:
    spec, mask = _spec_and_mask(args)
    text = args.info.strip()
    if any(ch not in "01" for ch in text):
        raise UsageError("--info expects a string of 0/1 characters")
    if len(text) != mask.k_sub:
        raise UsageError(f"--info has {len(text)} bits, code needs {mask.k_sub}")
    c = encode(spec, mask, np.array([int(ch) for ch in text], dtype=np.uint8))
    print("\n".join(str(int(v)) for v in c))
    return 0


def cmd_decode(args) -> int:
    spec, mask = _spec_and_mask(args)
    y = read_soft_vector(args.input)
    if y.size != spec.n:
        raise UsageError(f"soft vector has {y.size} entries, code length is {spec.n}")
    if args.decoder == "basic":
        res = decode_basic(spec, mask, y)
    elif args.decoder == "list":
        res = decode_list(spec, mask, y, args.L, args.branch)
    else:
        if args.prune:
            raise UsageError("the permutation decoder works on full codes only")
        res = decode_perm(spec, y, args.l, build_perm_set(spec.m, spec.r), args.branch)
    _print_decision(res.best_info, res.best_log_cost, res.flops)
    return 0


def cmd_ml(args) -> int:
    spec, mask = _spec_and_mask(args)
    y = read_soft_vector(args.input)
    if y.size != spec.n:
        raise UsageError(f"soft vector has {y.size} entries, code length is {spec.n}")
    info, _, cost = ml_bruteforce(spec, mask, y)
    _print_decision(info, cost)
    return 0


@dataclass
class RunManifest:
    config: dict
    version: str
    seed: int
    started: str
    finished: str = ""
    outputs: list[str] = field(default_factory=list)
    argv: list[str] = field(default_factory=list)

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _merge(args, cfg: dict) -> dict:
    """Flags override the config file; returns plain settings."""
    code, dec = cfg.get("code", {}), cfg.get("decoder", {})
    chan, run, out = cfg.get("channel", {}), cfg.get("run", {}), cfg.get("output", {})

    def pick(flag, section, key, default):
        v = getattr(args, flag)
        return v if v is not None else section.get(key, default)

    s = {
        "m": pick("m", code, "m", None),
        "r": pick("r", code, "r", None),
        "prune": pick("prune", code, "prune", 0),
        "kind": pick("decoder", dec, "kind", "list"),
        "L": pick("L", dec, "L", 16),
        "l": pick("l", dec, "l", 16),
        "branch": pick("branch", dec, "branch", 4),
        "seed": pick("seed", run, "seed", 0),
        "workers": pick("workers", run, "workers", 1),
        "min_errors": pick("min_errors", run, "min_errors", 100),
        "max_trials": pick("max_trials", run, "max_trials", 1_000_000),
        "batch_size": pick("batch_size", run, "batch_size", 256),
        "out": pick("out", out, "out", None),
        "format": pick("format", out, "format", "csv"),
    }
    if s["m"] is None or s["r"] is None:
        raise UsageError("simulate needs --m and --r (or a [code] section)")
    if args.snr is not None:
        s["snr"] = list(args.snr)
    elif args.snr_range is not None:
        s["snr"] = parse_snr_range(args.snr_range)
    elif "snr_db" in chan:
        v = chan["snr_db"]
        s["snr"] = list(v) if isinstance(v, list) else [v]
    elif "snr_range" in chan:
        if not isinstance(chan["snr_range"], list) or len(chan["snr_range"]) != 3:
            raise UsageError("channel.snr_range must be [start, stop, step]")
        s["snr"] = snr_grid(*map(float, chan["snr_range"]))
    else:
        raise UsageError("no SNR points given (--snr, --snr-range or channel.snr_db)")
    if s["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got '{s['format']}'")
    return s


def _series(s: dict) -> list[tuple[str, DecoderConfig]]:
    """One decoder per list size when the config lists several of them."""
    key, other = ("l", "L") if s["kind"] == "perm" else ("L", "l")
    sizes = s[key] if isinstance(s[key], list) else [s[key]]
    fixed = 16 if isinstance(s[other], list) else int(s[other])
    out = []
    for size in sizes:
        tag = "" if len(sizes) == 1 else f"_{key}{size}"
        try:
            dec = DecoderConfig(kind=s["kind"], branch=int(s["branch"]), **{key: int(size), other: fixed})
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc))
        out.append((tag, dec))
    return out


def cmd_simulate(args) -> int:
    if args.config and args.recipe:
        raise UsageError("give either --config or --recipe, not both")
    cfg = {}
    if args.recipe:
        cfg = load_config(recipe_path(args.recipe))
    elif args.config:
        cfg = load_config(args.config)
    s = _merge(args, cfg)
    for tag, dec in _series(s):
        try:
            config = SimConfig(m=int(s["m"]), r=int(s["r"]), snr_points_db=tuple(s["snr"]), decoder=dec,
                               prune=int(s["prune"]), min_word_errors=int(s["min_errors"]),
                               max_trials=int(s["max_trials"]), seed=int(s["seed"]),
                               workers=int(s["workers"]), batch_size=int(s["batch_size"]))
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc))
        manifest = RunManifest(config.to_dict(), __version__, config.seed, _now(), argv=sys.argv[1:])
        points = sweep(config)
        text = to_csv(points) if s["format"] == "csv" else to_json(points, config)
        manifest.finished = _now()
        if s["out"] is None:
            if tag:
                print(f"# {dec.label()}")
            sys.stdout.write(text)
            continue
        base = Path(s["out"])
        path = base.with_name(base.stem + tag + base.suffix)
        try:
            path.write_text(text)
            manifest.outputs = [str(path)]
            manifest.write(path.with_name(path.name + ".manifest.json"))
        except OSError as exc:
            raise RuntimeError(f"cannot write {path}: {exc.strerror}")
        print(f"wrote {path}")
    return 0


def cmd_recipes(args) -> int:
    for name in list_recipes():
        print(name)
    return 0


# --- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report("usage", f"{self.prog}: {message}")
        raise SystemExit(2)


def _code_args(p, required=True):
    p.add_argument("--m", type=int, required=required, help="log2 of the block length")
    p.add_argument("--r", type=int, required=required, help="code order")
    p.add_argument("--prune", type=int, default=None if not required else 0,
                   help="number of information bits to freeze (subcode)")


def _decoder_args(p, defaults=True):
    p.add_argument("--decoder", choices=("basic", "list", "perm"), default="list" if defaults else None)
    p.add_argument("--L", type=int, default=16 if defaults else None, help="list size")
    p.add_argument("--l", type=int, default=16 if defaults else None, help="merged list size (perm decoder)")
    p.add_argument("--branch", type=int, choices=(0, 2, 4), default=4 if defaults else None,
                   help="words tried at full-space leaves (0 = all)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rmlist", description="Recursive list decoding of Reed-Muller codes.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("info", help="code parameters and leaf paths")
    _code_args(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("encode", help="encode an information block to +-1 symbols")
    _code_args(p)
    p.add_argument("--info", required=True, help="information bits as a 0/1 string")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode one soft vector read from a file ('-' = stdin)")
    _code_args(p)
    _decoder_args(p)
    p.add_argument("input")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("ml-bruteforce", help="exhaustive ML decoding of one soft vector")
    _code_args(p)
    p.add_argument("input")
    p.set_defaults(func=cmd_ml)

    p = sub.add_parser("simulate", help="WER sweep over SNR points")
    _code_args(p, required=False)
    _decoder_args(p, defaults=False)
    p.add_argument("--config", help="TOML run description")
    p.add_argument("--recipe", help="name of a bundled recipe")
    snr = p.add_mutually_exclusive_group()
    snr.add_argument("--snr", type=float, nargs="+", help="Eb/N0 points in dB")
    snr.add_argument("--snr-range", help="start:stop:step in dB, stop included")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--min-errors", type=int)
    p.add_argument("--max-trials", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--out", help="output file; a manifest is written next to it")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("recipes", help="list bundled recipes")
    p.set_defaults(func=cmd_recipes)
    return ap


def _report(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, CodeParameterError) as exc:
        _report("usage", str(exc))
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI reports every failure the same way
        _report("runtime", f"{type(exc).__name__}: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
