"""Command-line front end: ``trendcast {synth,forecast,evaluate,provision,kernels}``.

Settings resolve as flags > JSON config file (``--config`` or the
``TRENDCAST_CONFIG`` environment variable) > built-in defaults.  Exit codes:
0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from . import _kernels
from .algebraic_estimator import (
    DEFAULT_CENTERED_WINDOW,
    DEFAULT_WINDOW,
    Alignment,
    build_degree1_kernels,
    write_kernel_csv,
)
from .errors import HorizonTooLong, TrendcastError
from .evaluation import DEFAULT_HORIZONS, DEFAULT_METHODS, build_comparison_table
from .forecasters import MAX_HORIZON, Method, batch_forecast, check_horizon, write_forecasts_csv
from .provisioning import (
    DEFAULT_CAPACITY_MS,
    DEFAULT_PROVISION_HORIZON,
    DEFAULT_SCALE_FACTOR,
    provision_series,
    write_plans_csv,
)
from .series_core import (
    DEFAULT_MAX_GAP,
    SynthesisSpec,
    ingest_csv,
    normalize_max,
    synthesize_workload,
    write_csv,
)

logger = logging.getLogger("trendcast")

CONFIG_ENV = "TRENDCAST_CONFIG"
METHOD_CHOICES = [m.value for m in Method] + ["all"]


@dataclass(frozen=True)
class RunConfig:
    command: str = "synth"
    input: str | None = None
    output: str | None = None
    method: str | None = None
    horizon: int | None = None
    horizons: tuple[int, ...] = DEFAULT_HORIZONS
    window: int = DEFAULT_WINDOW
    centered_window: int = DEFAULT_CENTERED_WINDOW
    seed: int = 0
    days: int = 10
    noise_std: float = SynthesisSpec.noise_std
    scale_factor: float = DEFAULT_SCALE_FACTOR
    capacity_ms: float = DEFAULT_CAPACITY_MS
    allow_long_horizon: bool = False
    normalize: bool = False
    max_gap: int = DEFAULT_MAX_GAP
    score_against_raw: bool = False
    alignment: str = "causal"

    def resolved_method(self) -> str:
        if self.method:
            return self.method
        return {"provision": Method.MIXED.value, "evaluate": "default"}.get(self.command, "all")

    def resolved_horizon(self) -> int:
        if self.horizon is not None:
            return self.horizon
        return DEFAULT_PROVISION_HORIZON if self.command == "provision" else 30


_FIELDS = {f.name for f in fields(RunConfig)}


def load_config_file(path: str | os.PathLike) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise TrendcastError(f"{path}: config must be a JSON object")
    clean = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(clean) - _FIELDS
    if unknown:
        raise TrendcastError(f"{path}: unknown config keys {sorted(unknown)}")
    if "horizons" in clean:
        clean["horizons"] = tuple(int(h) for h in clean["horizons"])
    return clean


def _horizon_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.replace(" ", "").split(",") if p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated minutes, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--input", help="input CSV (t,value); '-' for stdin; synthesize if absent")
    common.add_argument("--output", help="output path; '-' or absent for stdout")
    common.add_argument("--method", choices=METHOD_CHOICES)
    common.add_argument("--horizon", type=int, help="forecast horizon in minutes")
    common.add_argument("--horizons", type=_horizon_list, help="comma-separated horizons")
    common.add_argument("--window", type=int, help="causal window in minutes")
    common.add_argument("--centered-window", type=int, help="day-back centered window in minutes")
    common.add_argument("--seed", type=int)
    common.add_argument("--days", type=int)
    common.add_argument("--noise-std", type=float)
    common.add_argument("--scale-factor", type=float)
    common.add_argument("--capacity-ms", type=float)
    common.add_argument("--max-gap", type=int, help="longest interpolated gap in samples")
    common.add_argument("--allow-long-horizon", action="store_true",
                        help=f"permit horizons beyond {MAX_HORIZON} min")
    common.add_argument("--normalize", action="store_true",
                        help="divide the input by its maximum first")
    common.add_argument("--score-against-raw", action="store_true",
                        help="score against the raw series instead of the hindsight trend")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="trendcast", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[common], help="write a synthetic workload trace")
    sub.add_parser("forecast", parents=[common], help="write trend forecasts")
    sub.add_parser("evaluate", parents=[common], help="SSE comparison table")
    sub.add_parser("provision", parents=[common], help="predicted VM counts")
    kern = sub.add_parser("kernels", parents=[common], help="dump the estimator kernels")
    kern.add_argument("--alignment", choices=["causal", "centered"],
                      default=argparse.SUPPRESS)
    return parser


def resolve_config(ns: argparse.Namespace, environ=os.environ) -> RunConfig:
    given = vars(ns).copy()
    given.pop("verbose", None)
    path = given.pop("config", None) or environ.get(CONFIG_ENV)
    settings = load_config_file(path) if path else {}
    settings.update({k: v for k, v in given.items() if k in _FIELDS})
    return replace(RunConfig(), **settings)


@contextmanager
def _sink(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _synth_spec(cfg: RunConfig) -> SynthesisSpec:
    return replace(SynthesisSpec(), noise_std=cfg.noise_std)


def load_series(cfg: RunConfig):
    if cfg.input is None:
        series = synthesize_workload(cfg.days, _synth_spec(cfg), cfg.seed)
    elif cfg.input == "-":
        series = ingest_csv(sys.stdin, max_gap=cfg.max_gap)
    else:
        series = ingest_csv(cfg.input, max_gap=cfg.max_gap)
    if cfg.normalize:
        series, scale = normalize_max(series)
        logger.info("normalized by %g", scale)
    return series


def _methods(cfg: RunConfig) -> list[Method]:
    name = cfg.resolved_method()
    if name == "default":
        return list(DEFAULT_METHODS)
    if name == "all":
        return list(Method)
    return [Method(name)]


def cmd_synth(cfg: RunConfig) -> int:
    series = synthesize_workload(cfg.days, _synth_spec(cfg), cfg.seed)
    if cfg.output in (None, "-"):
        write_csv(series, sys.stdout)
    else:
        write_csv(series, cfg.output)
    logger.info("wrote %d samples", len(series))
    return 0


def cmd_forecast(cfg: RunConfig) -> int:
    series = load_series(cfg)
    h = cfg.resolved_horizon()
    out = [
        batch_forecast(series, m, h, window=cfg.window, centered_window=cfg.centered_window,
                       allow_long_horizon=cfg.allow_long_horizon)
        for m in _methods(cfg)
    ]
    with _sink(cfg.output) as fh:
        write_forecasts_csv(out, fh)
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    series = load_series(cfg)
    report = build_comparison_table(
        series, cfg.horizons, _methods(cfg), window=cfg.window,
        centered_window=cfg.centered_window, score_against_raw=cfg.score_against_raw,
        allow_long_horizon=cfg.allow_long_horizon,
    )
    text = report.to_text()
    if cfg.output in (None, "-"):
        sys.stdout.write(text)
        return 0
    report.write_csv(cfg.output)
    Path(cfg.output).with_suffix(".txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_provision(cfg: RunConfig) -> int:
    series = load_series(cfg)
    plans = provision_series(
        series, cfg.resolved_method(), cfg.resolved_horizon(),
        scale_factor=cfg.scale_factor, per_vm_capacity_ms=cfg.capacity_ms,
        window=cfg.window, centered_window=cfg.centered_window,
        allow_long_horizon=cfg.allow_long_horizon,
    )
    with _sink(cfg.output) as fh:
        write_plans_csv(plans, fh)
    return 0


def cmd_kernels(cfg: RunConfig) -> int:
    align = Alignment.CENTERED if cfg.alignment == "centered" else Alignment.CAUSAL
    T = cfg.centered_window if align is Alignment.CENTERED else cfg.window
    with _sink(cfg.output) as fh:
        write_kernel_csv(build_degree1_kernels(T, 1, align), fh)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
    "provision": cmd_provision,
    "kernels": cmd_kernels,
}


def _validate(parser: argparse.ArgumentParser, cfg: RunConfig) -> None:
    try:
        if cfg.command in ("forecast", "provision"):
            check_horizon(cfg.resolved_horizon(), cfg.allow_long_horizon)
        if cfg.command == "evaluate":
            if not cfg.horizons:
                parser.error("--horizons is empty")
            for h in cfg.horizons:
                check_horizon(h, cfg.allow_long_horizon)
    except HorizonTooLong as exc:
        parser.error(str(exc))
    if cfg.command == "provision" and cfg.resolved_method() == "all":
        parser.error("provision takes a single method")
    if cfg.days < 2:
        parser.error("--days must be at least 2")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = resolve_config(ns)
    except (OSError, ValueError, TypeError) as exc:
        parser.error(f"config: {exc}")
    _validate(parser, cfg)
    logger.info("running %s with %s (kernel backend: %s)", cfg.command, asdict(cfg),
                _kernels.BACKEND)
    try:
        return COMMANDS[cfg.command](cfg)
    except BrokenPipeError:
        # downstream closed early (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except (TrendcastError, OSError) as exc:
        print(f"trendcast {cfg.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
