"""Command-line entry point.

    varactor-ris sweep      [--config PATH] [--freq-ghz-range A,B,STEP_MHZ] [--bias-range A,B,STEP] --out DIR
    varactor-ris beam       [--config PATH] --freq-ghz X --theta-deg X [--phi-deg X]
                            [--feed-mm X,Y,Z | --feed-model plane] [--mode ideal|quantized] --out DIR
    varactor-ris acceptance [--config PATH] [--out DIR]
    varactor-ris calibrate  [--write PATH]

Angles are degrees at this interface. Exit status is 0 only when every
stage and every checked criterion succeeded.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .circuit import UnitCellParams, phase_span, sweep_response
from .config import default_params, load_params, save_params
from .constants import BAND, CENTER_FREQUENCY
from .errors import ConfigError, RisError
from .synthesis import FeedSpec

log = logging.getLogger("varactor_ris")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _triple(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}") from exc
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return parts


def _axis(start: float, stop: float, step: float, decimals: int) -> np.ndarray:
    if step <= 0 or stop < start:
        raise RisError(f"invalid range {start}..{stop} step {step}")
    n = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(n), decimals)


def _params(path) -> UnitCellParams:
    return load_params(path) if path else default_params()


def cmd_sweep(args) -> int:
    params = _params(args.config)
    f0, f1, fstep = args.freq_ghz_range
    v0, v1, vstep = args.bias_range
    freqs = _axis(f0 * 1e9, f1 * 1e9, fstep * 1e6, 0)
    biases = _axis(v0, v1, vstep, 9)
    table = sweep_response(freqs, biases, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table.write_csv(out / "sweep.csv")

    centre = freqs[int(np.argmin(np.abs(freqs - CENTER_FREQUENCY)))]
    in_band = (freqs >= BAND[0] - 1.0) & (freqs <= BAND[1] + 1.0)
    mags = np.abs(table.gamma[in_band]) if in_band.any() else np.abs(table.gamma)
    summary = (
        f"span_frequency_hz: {float(centre)!r}\n"
        f"phase_span_deg: {phase_span(table, centre):.4f}\n"
        f"min_magnitude: {mags.min():.6f}\n"
        f"samples: {len(table)}\n"
    )
    (out / "summary.txt").write_text(summary)
    print(summary, end="")
    return EXIT_OK


def cmd_beam(args) -> int:
    from .pipeline import ScenarioSpec, run_scenario, write_scenario

    params = _params(args.config)
    if args.feed_model == "plane":
        feed = FeedSpec.plane()
    else:
        feed = FeedSpec(position=tuple(v * 1e-3 for v in args.feed_mm))
    spec = ScenarioSpec(args.freq_ghz * 1e9, args.theta_deg, args.phi_deg, feed, args.mode)
    result = run_scenario(spec, params)
    target = write_scenario(result, args.out)
    print(f"wrote {target}")
    print(result.metrics.to_text(), end="")
    return EXIT_OK


def cmd_acceptance(args) -> int:
    from .acceptance import format_report, run_all

    params = _params(args.config)
    results = run_all(params)
    report = format_report(results)
    print(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "acceptance.txt").write_text(report + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def cmd_calibrate(args) -> int:
    from .calibration import calibrate_cell, envelope

    params = calibrate_cell(seed=args.seed)
    rep = envelope(params)
    print(
        f"fixed_inductance={params.fixed_inductance:.4e} fixed_capacitance={params.fixed_capacitance:.4e} "
        f"series_resistance={params.varactor.series_resistance:.4f} "
        f"sheet_impedance_ratio={params.sheet_impedance_ratio:.4f}"
    )
    print(f"span@6.1GHz={rep.span_center_deg:.2f} deg, min |gamma|={rep.min_magnitude:.4f}")
    if args.write:
        save_params(params, args.write)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varactor-ris", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="unit-cell reflection sweep")
    p.add_argument("--config")
    p.add_argument("--freq-ghz-range", type=_triple, default=(5.8, 6.4, 10.0), metavar="START,STOP,STEP_MHZ")
    p.add_argument("--bias-range", type=_triple, default=(0.0, 14.0, 0.1), metavar="START,STOP,STEP_V")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("beam", help="synthesise, plan and evaluate one beam")
    p.add_argument("--config")
    p.add_argument("--freq-ghz", type=float, default=6.1)
    p.add_argument("--theta-deg", type=float, required=True)
    p.add_argument("--phi-deg", type=float, default=0.0)
    p.add_argument("--feed-mm", type=_triple, default=(0.0, 0.0, 450.0), metavar="X,Y,Z")
    p.add_argument("--feed-model", choices=("spherical", "plane"), default="spherical")
    p.add_argument("--mode", choices=("ideal", "quantized"), default="quantized")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_beam)

    p = sub.add_parser("acceptance", help="run the acceptance criteria")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_acceptance)

    p = sub.add_parser("calibrate", help="re-run the default circuit calibration")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--write", metavar="PATH")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        where = f" [field: {exc.field}]" if exc.field else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return EXIT_USAGE
    except RisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
