"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 numerical degeneracy.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import arprocess, kcdf, kolmogorov, montecarlo, yulewalker
from .arprocess import ArModel, Series
from .exceptions import DegenerateDataError
from .rng_dist import RngState, law_from_name

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEGENERATE = 3


class UsageError(Exception):
    pass


def _phi_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("phi needs at least one coefficient")
    return vals


def _level(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"level must lie in (0, 1), got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _load_series(path, p: int) -> Series:
    """Read a series CSV; the first ``p`` values always serve as the presample."""
    try:
        values, meta = arprocess.read_series_csv(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    except ValueError as exc:
        raise UsageError(str(exc))
    if values.size < p + 2:
        raise UsageError(
            f"order {p} needs at least {p + 2} observations; {path} has {values.size}"
        )
    declared = meta.get("presample_len")
    if declared is None or int(declared) != p:
        print(
            f"note: first {p} observation(s) used as presample; n = {values.size - p}",
            file=sys.stderr,
        )
    return Series.from_values(values, p)


def _estimate(series: Series, p: int):
    fitted = yulewalker.fit(series, p)
    res = yulewalker.residuals(series, fitted)
    h = kcdf.bandwidth_rule(res.z_hat)
    return fitted, res, kcdf.smooth_cdf(res.z_hat, h)


def cmd_simulate(args) -> int:
    model = ArModel(args.phi)
    if not arprocess.check_causal(model.phi):
        mods = ", ".join(f"{m:.6g}" for m in arprocess.root_moduli(model.phi))
        print(f"error: phi={list(model.phi)} is not causal; root moduli: {mods}", file=sys.stderr)
        return EXIT_USAGE
    law = law_from_name(args.law)
    series, _ = arprocess.simulate(model, law, args.n, RngState(args.seed))
    meta = {"seed": args.seed, "phi": ",".join(repr(c) for c in model.phi), "law": law.name}
    arprocess.write_series_csv(args.out, series, meta)
    return EXIT_OK


def cmd_estimate(args) -> int:
    series = _load_series(args.data, args.p)
    fitted, res, fhat = _estimate(series, args.p)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "fit.txt").write_text(fitted.to_record() + f"bandwidth={fhat.h!r}\n")
    kcdf.write_cdf_csv(out / "residuals.csv", np.arange(1, series.n + 1), res.z_hat, ("t", "z_hat"))
    z = kcdf.plot_grid(fhat)
    kcdf.write_cdf_csv(out / "fhat.csv", z, fhat(z), ("z", "F_hat"))
    print(f"order: {fitted.order}")
    print(f"n: {series.n}")
    print("phi_hat: " + " ".join(f"{v:.6f}" for v in fitted.phi_hat))
    print(f"bandwidth: {fhat.h:.6f}")
    return EXIT_OK


def cmd_band(args) -> int:
    series = _load_series(args.data, args.p)
    _, _, fhat = _estimate(series, args.p)
    n = series.n
    if n < kolmogorov.MIN_BAND_N:
        print(
            f"warning: n={n} < {kolmogorov.MIN_BAND_N}; asymptotic critical values may be inaccurate",
            file=sys.stderr,
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", kolmogorov.SmallSampleWarning)
        band = kolmogorov.build_band(fhat, n, args.alpha)
    kolmogorov.write_band_csv(args.out, band, fhat.grid())
    print(f"halfwidth: {band.halfwidth:.4f}")
    print(f"level: {band.level:g}")
    return EXIT_OK


def cmd_predict(args) -> int:
    if not args.alpha1 < args.alpha2:
        raise UsageError("--alpha1 must be smaller than --alpha2")
    series = _load_series(args.data, args.p)
    fitted, _, fhat = _estimate(series, args.p)
    x = series.values
    p = fitted.order
    xhat = float(np.dot(fitted.phi_hat, x[::-1][:p]))
    lo = xhat + kcdf.quantile(fhat, args.alpha1)
    hi = xhat + kcdf.quantile(fhat, args.alpha2)
    print(f"forecast: {xhat:.6f}")
    print(f"interval: [{lo:.6f}, {hi:.6f}]")
    print(f"level: {args.alpha2 - args.alpha1:g}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        configs = montecarlo.load_config(args.config)
    except montecarlo.ConfigError as exc:
        raise UsageError(f"{args.config}: {exc}")
    out = args.out or configs[0].output_dir
    if out is None:
        raise UsageError("no output directory: set output_dir in the config or pass --out")
    records = montecarlo.run_experiment(configs, workers=args.workers)
    montecarlo.write_outputs(configs, records, out)
    print(montecarlo.format_summary(montecarlo.summarize(records)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="arerrdist",
        description="Estimate the innovation CDF of an AR(p) series with Kolmogorov confidence bands.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a stationary AR(p) series")
    p.add_argument("--phi", type=_phi_list, required=True, help="comma-separated coefficients")
    p.add_argument("--law", choices=["normal", "laplace"], default="normal")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    def data_args(q):
        q.add_argument("--data", required=True, help="series CSV")
        q.add_argument("--p", type=_positive_int, required=True, help="AR order")

    p = sub.add_parser("estimate", help="Yule-Walker fit and smooth residual CDF")
    data_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("band", help="smooth simultaneous confidence band")
    data_args(p)
    p.add_argument("--alpha", type=_level, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_band)

    p = sub.add_parser("predict", help="one-step prediction interval")
    data_args(p)
    p.add_argument("--alpha1", type=_level, default=0.025)
    p.add_argument("--alpha2", type=_level, default=0.975)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", default=None, help="override output_dir from the config")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
