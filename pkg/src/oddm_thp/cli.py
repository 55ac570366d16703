"""Command-line entry point: simulate, sweep, bounds, validate.

Exit codes: 0 success, 2 configuration error, 3 validation failure.
"""

import argparse
import sys

import numpy as np

from .analysis import evaluate_bounds
from .sim import (
    ConfigError,
    best_alpha_records,
    load_config,
    sweep,
    write_bounds_csv,
    write_records_csv,
)
from .validate import run_validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3


def _parse_alpha_spec(spec: str) -> list[float]:
    """'a0:a1:step' inclusive range, or a comma-separated list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("alpha range must look like a0:a1:step")
        a0, a1, step = (float(p) for p in parts)
        if step <= 0 or a1 < a0:
            raise ConfigError("alpha range needs a1 >= a0 and step > 0")
        return list(np.arange(a0, a1 + step / 2.0, step))
    return [float(p) for p in spec.split(",")]


def _parse_float_list(spec: str) -> list[float]:
    return [float(p) for p in spec.split(",")]


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    records = sweep(cfg, workers=args.workers)
    write_records_csv(records, args.out)
    print(f"wrote {len(records)} points to {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    records = sweep(cfg, workers=args.workers)
    if args.optimize_alpha:
        records = best_alpha_records(records)
    write_records_csv(records, args.out)
    print(f"wrote {len(records)} points to {args.out}")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    alphas = _parse_alpha_spec(args.alpha)
    snrs = _parse_float_list(args.snr_db)
    rows = []
    for alpha in alphas:
        for snr_db in snrs:
            snr = 10.0 ** (snr_db / 10.0)
            row = {"mod_order": args.mod, "alpha": alpha, "snr_db": snr_db,
                   "sigma_h1_sq": args.sigma_h1_sq}
            row.update(evaluate_bounds(args.mod, alpha, args.sigma_h1_sq, snr))
            rows.append(row)
    rows.sort(key=lambda r: (r["alpha"], r["snr_db"]))
    write_bounds_csv(rows, args.out)
    print(f"wrote {len(rows)} bound rows to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    results = run_validation(preset=args.preset)
    for res in results:
        print(res.line())
    if all(r.passed for r in results):
        print("all checks passed")
        return EXIT_OK
    print("validation FAILED")
    return EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oddm-thp",
        description="Delay-Doppler modulation with time-domain precoding: "
                    "Monte-Carlo BER runs and closed-form bound evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the configured points, write a results CSV")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.set_defaults(fn=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="alpha x SNR cross-product sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--optimize-alpha", action="store_true",
                         help="keep only the minimum-BER alpha per SNR")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_bounds = sub.add_parser("bounds", help="evaluate the closed-form BER bounds")
    p_bounds.add_argument("--mod", type=int, choices=(4, 16), required=True)
    p_bounds.add_argument("--alpha", required=True,
                          help="range a0:a1:step or comma-separated list")
    p_bounds.add_argument("--snr-db", required=True, help="comma-separated list")
    p_bounds.add_argument("--sigma-h1-sq", type=float, default=1.0)
    p_bounds.add_argument("--out", required=True)
    p_bounds.set_defaults(fn=_cmd_bounds)

    p_val = sub.add_parser("validate", help="run the cross-module oracle checks")
    p_val.add_argument("--preset", default="small", choices=("small",))
    p_val.set_defaults(fn=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
