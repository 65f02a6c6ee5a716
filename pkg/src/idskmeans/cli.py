"""``bench`` command line.

    bench run --dataset iris --algo ids-kmeans --k 3 --seeds 30 --format json --out iris.json
    bench compare --config wine.cfg

Config files are flat ``key = value`` lines. Keys are the long flag names
(``max-evals`` or ``max_evals``); ``#`` starts a comment. In a compare config
``algo`` lists several algorithms separated by commas, and each is run with
the remaining settings.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from .bench import (
    ALGORITHMS,
    ExperimentConfig,
    compare,
    comparison_markdown,
    cost_counters,
    emit,
    run_experiment,
)

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_BOOL_KEYS = {"traces", "timing"}


def parse_seeds(text: str) -> list[int]:
    text = text.strip()
    if "," in text or text.startswith("["):
        return [int(s) for s in text.strip("[]").split(",") if s.strip()]
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    count = int(text)
    if count < 1:
        raise ValueError("seed count must be >= 1")
    return list(range(count))


def _convert(key: str, value: str):
    if key == "seeds":
        return parse_seeds(value)
    if key in _BOOL_KEYS:
        return value.strip().lower() in ("1", "true", "yes", "on")
    kind = str(_FIELD_TYPES[key])
    if value.strip().lower() in ("", "none") and "None" in kind:
        return None
    if kind.startswith("int"):
        return int(value)
    if kind.startswith("float"):
        return float(value)
    return value.strip()


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file into raw strings keyed by field name."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(":")
        key = key.strip().replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def config_from(raw: dict[str, str]) -> ExperimentConfig:
    kwargs = {key: _convert(key, value) for key, value in raw.items()}
    if kwargs.get("format") == "markdown":
        kwargs["format"] = "md"
    return ExperimentConfig(**kwargs)


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file; flags given here override it")
    p.add_argument("--dataset", help="iris, wine, glass, or a CSV path (needs --schema)")
    p.add_argument("--schema", help="for CSV paths, e.g. 'label=4,delimiter=comma,header=0,drop=0'")
    p.add_argument("--algo", choices=sorted(ALGORITHMS))
    p.add_argument("--k", type=int)
    p.add_argument("--seeds", help="a count n (seeds 0..n-1), a list '1,4,9', or a range '0..29'")
    p.add_argument("--preprocess", choices=["none", "zscore", "minmax"])
    p.add_argument("--depth", type=int, help="inner Lloyd iterations per objective evaluation")
    p.add_argument("--max-evals", type=int)
    p.add_argument("--max-restarts", type=int)
    p.add_argument("--initial-step", type=float)
    p.add_argument("--collapse-rel", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--shrink", type=float)
    p.add_argument("--rs-step", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--jagota", choices=["mean", "sum"])
    p.add_argument("--format", choices=["md", "markdown", "csv", "json"])
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.add_argument("--traces", action="store_const", const="true",
                   help="write per-seed trace CSVs next to --out")
    p.add_argument("--no-timing", dest="timing", action="store_const", const="false",
                   help="omit wall times so reports are byte-for-byte reproducible")


def _gather(args) -> dict[str, str]:
    raw = read_config(args.config) if args.config else {}
    for key in _FIELD_TYPES:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = str(value) if not isinstance(value, str) else value
    return raw


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_run(args) -> int:
    raw = _gather(args)
    traces_requested = raw.get("traces", "false").lower() in ("1", "true", "yes", "on")
    raw.setdefault("traces", "true")
    cfg = config_from(raw)
    report = run_experiment(cfg)
    fmt = "md" if cfg.format == "markdown" else cfg.format
    text = emit(report, fmt, cfg.out, traces=traces_requested and cfg.out is not None)
    if cfg.out is None:
        sys.stdout.write(text)
    if cfg.algo != "kmeans" and fmt == "md":
        cost = cost_counters(report)
        summary = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                            for k, v in cost.as_dict().items())
        print(f"cost: {summary}", file=sys.stderr)
    return 0


def cmd_compare(args) -> int:
    raw = _gather(args)
    algos = [a.strip() for a in raw.pop("algo", "kmeans,ids-kmeans").split(",") if a.strip()]
    cfgs = [config_from({**raw, "algo": a, "traces": "false"}) for a in algos]
    table = compare(cfgs)
    _write(comparison_markdown(table), cfgs[0].out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one algorithm over a list of seeds")
    _add_experiment_flags(run)
    run.set_defaults(func=cmd_run)
    cmp_ = sub.add_parser("compare", help="run several algorithms on one dataset side by side")
    _add_experiment_flags(cmp_)
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
