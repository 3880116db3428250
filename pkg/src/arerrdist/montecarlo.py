"""Replication engine for the simulation study.

Each replication simulates an AR path, fits it by Yule-Walker, and compares
four estimators of the innovation CDF against the true law:

* ``fhat``   smooth CDF of the residuals (feasible)
* ``ftilde`` smooth CDF of the true innovations (infeasible benchmark)
* ``fhatn``  empirical CDF of the residuals
* ``fn``     empirical CDF of the true innovations

and records whether Kolmogorov bands around ``fhat``, ``ftilde`` and
``fn`` cover the truth.
"""
from __future__ import annotations

import csv
import logging
import math
import warnings
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median
from typing import Iterable, Sequence

import numpy as np

from . import arprocess, kcdf, kolmogorov, metrics, yulewalker
from .arprocess import ArModel
from .exceptions import DegenerateDataError
from .rng_dist import ErrorLaw, RngState, law_from_name, reference_cdf, reference_ppf

__all__ = [
    "ExperimentConfig",
    "ReplicationRecord",
    "ConfigError",
    "Estimators",
    "BAND_KINDS",
    "QUANTILE_POINTS",
    "replication_rng",
    "build_estimators",
    "run_replication",
    "run_experiment",
    "summarize",
    "ratio_rows",
    "coverage_grid",
    "load_config",
    "write_outputs",
    "format_summary",
]

log = logging.getLogger(__name__)

BAND_KINDS = ("fhat", "ftilde", "fn")
QUANTILE_POINTS = 201


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class ExperimentConfig:
    model: ArModel
    law: ErrorLaw
    n_list: tuple[int, ...]
    replications: int
    alpha_list: tuple[float, ...] = (0.01, 0.05, 0.1, 0.2)
    seed: int = 0
    output_dir: Path | None = None
    share_innovations: bool = False
    bandwidth: float | None = None  # fixed h overriding the IQR rule

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "alpha_list", tuple(float(a) for a in self.alpha_list))
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.n_list:
            raise ValueError("n_list is empty")
        p = self.model.order
        for n in self.n_list:
            if n < p + 1:
                raise ValueError(f"sample size {n} too small for order {p}")
        for a in self.alpha_list:
            if not 0.0 < a < 1.0:
                raise ValueError(f"level {a} outside (0, 1)")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth override must be positive")


@dataclass(frozen=True)
class ReplicationRecord:
    phi: tuple[float, ...]
    law: str
    n: int
    rep_id: int
    failed: bool = False
    error: str = ""
    phi_hat: tuple[float, ...] = ()
    h_hat: float = math.nan
    h_tilde: float = math.nan
    d_n_fhat: float = math.nan
    d_n_ftilde: float = math.nan
    d_n_fn: float = math.nan
    d_n_fhatn: float = math.nan
    d_hat_tilde: float = math.nan
    ise_fhat: float = math.nan
    ise_ftilde: float = math.nan
    ise_df_fhat: float = math.nan
    ise_df_ftilde: float = math.nan
    # alpha -> (fhat, ftilde, fn)
    cover: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Estimators:
    series: arprocess.Series
    errors: np.ndarray
    fitted: yulewalker.FittedAr
    fhat: kcdf.SmoothCdf
    ftilde: kcdf.SmoothCdf
    fhatn: kcdf.StepCdf
    fn: kcdf.StepCdf


def _model_key(model: ArModel) -> int:
    return zlib.crc32(repr((model.phi, model.sigma)).encode())


def replication_rng(cfg: ExperimentConfig, n: int, rep_id: int) -> RngState:
    """Substream keyed by (seed, n, rep_id), plus the model unless innovations are shared."""
    base = RngState(cfg.seed)
    if cfg.share_innovations:
        return base.substream(n, rep_id)
    return base.substream(n, rep_id, _model_key(cfg.model))


def build_estimators(cfg: ExperimentConfig, n: int, rep_id: int) -> Estimators:
    series, z = arprocess.simulate(cfg.model, cfg.law, n, replication_rng(cfg, n, rep_id))
    fitted = yulewalker.fit(series, cfg.model.order)
    zhat = yulewalker.residuals(series, fitted).z_hat
    h_hat = cfg.bandwidth or kcdf.bandwidth_rule(zhat)
    h_tilde = cfg.bandwidth or kcdf.bandwidth_rule(z)
    return Estimators(
        series,
        z,
        fitted,
        kcdf.smooth_cdf(zhat, h_hat),
        kcdf.smooth_cdf(z, h_tilde),
        kcdf.step_cdf(zhat),
        kcdf.step_cdf(z),
    )


def coverage_grid(center, law: ErrorLaw) -> np.ndarray:
    """Center's evaluation grid joined with 201 equispaced quantiles of the law."""
    u = np.arange(1, QUANTILE_POINTS + 1) / (QUANTILE_POINTS + 1)
    q = reference_ppf(law, u)
    base = center.grid() if isinstance(center, kcdf.SmoothCdf) else np.empty(0)
    return np.unique(np.concatenate([base, q]))


def run_replication(cfg: ExperimentConfig, n: int, rep_id: int) -> ReplicationRecord:
    ident = dict(phi=cfg.model.phi, law=cfg.law.name, n=n, rep_id=rep_id)
    try:
        est = build_estimators(cfg, n, rep_id)
    except (DegenerateDataError, np.linalg.LinAlgError) as exc:
        log.warning("replication %s failed: %s", ident, exc)
        return ReplicationRecord(**ident, failed=True, error=str(exc))

    def truth(z):
        return reference_cdf(cfg.law, z)

    def ppf(u):
        return reference_ppf(cfg.law, u)

    fhat_grid, ftilde_grid = est.fhat.grid(), est.ftilde.grid()
    d_fhat, _ = metrics.sup_distance(est.fhat, truth, fhat_grid)
    d_ftilde, _ = metrics.sup_distance(est.ftilde, truth, ftilde_grid)
    d_fn, _ = metrics.sup_distance(est.fn, truth, est.fn.jumps)
    d_fhatn, _ = metrics.sup_distance(est.fhatn, truth, est.fhatn.jumps)
    d_ht, _ = metrics.sup_distance(
        est.fhat, est.ftilde, np.union1d(fhat_grid, ftilde_grid)
    )
    lo, hi = metrics.mise_range(est.fhat.centers)

    grids = {
        "fhat": coverage_grid(est.fhat, cfg.law),
        "ftilde": coverage_grid(est.ftilde, cfg.law),
        "fn": coverage_grid(est.fn, cfg.law),
    }
    centers = {"fhat": est.fhat, "ftilde": est.ftilde, "fn": est.fn}
    cover = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", kolmogorov.SmallSampleWarning)
        for alpha in cfg.alpha_list:
            cover[alpha] = tuple(
                kolmogorov.covers(kolmogorov.build_band(centers[k], n, alpha), truth, grids[k])
                for k in BAND_KINDS
            )

    return ReplicationRecord(
        **ident,
        phi_hat=tuple(float(v) for v in est.fitted.phi_hat),
        h_hat=est.fhat.h,
        h_tilde=est.ftilde.h,
        d_n_fhat=d_fhat,
        d_n_ftilde=d_ftilde,
        d_n_fn=d_fn,
        d_n_fhatn=d_fhatn,
        d_hat_tilde=d_ht,
        ise_fhat=metrics.ise(est.fhat, truth, lo, hi),
        ise_ftilde=metrics.ise(est.ftilde, truth, lo, hi),
        ise_df_fhat=metrics.ise_dF(est.fhat, truth, ppf),
        ise_df_ftilde=metrics.ise_dF(est.ftilde, truth, ppf),
        cover=cover,
    )


def _task(args):
    cfg, n, rep_id = args
    return run_replication(cfg, n, rep_id)


def _tasks(configs: Sequence[ExperimentConfig]):
    for cfg in configs:
        for n in cfg.n_list:
            for rep in range(cfg.replications):
                yield cfg, n, rep


def run_experiment(
    configs: ExperimentConfig | Sequence[ExperimentConfig], workers: int = 1
) -> list[ReplicationRecord]:
    """Run every (model, n, replication) task; output order never depends on ``workers``."""
    if isinstance(configs, ExperimentConfig):
        configs = [configs]
    tasks = list(_tasks(configs))
    if workers <= 1:
        return [_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_task, tasks, chunksize=chunk))


def _mean(vals: Iterable[float]) -> float:
    vals = list(vals)
    return math.fsum(vals) / len(vals) if vals else math.nan


def _ratio(a: float, b: float) -> float:
    return a / b if b > 0 else math.nan


def summarize(records: Sequence[ReplicationRecord]) -> list[dict]:
    """One row per (model, law, n): mean deviations, MISE, ratios, coverage frequencies.

    Failed replications are counted but excluded from every mean.
    """
    if not records:
        raise ValueError("no records to summarise")
    groups: dict[tuple, list[ReplicationRecord]] = {}
    for r in records:
        groups.setdefault((r.phi, r.law, r.n), []).append(r)
    rows = []
    for (phi, law, n), recs in groups.items():
        ok = [r for r in recs if not r.failed]
        row = {
            "phi": " ".join(repr(v) for v in phi),
            "law": law,
            "n": n,
            "replications": len(recs),
            "failed": len(recs) - len(ok),
        }
        for key in (
            "d_n_fhat",
            "d_n_ftilde",
            "d_n_fhatn",
            "d_n_fn",
            "d_hat_tilde",
            "ise_fhat",
            "ise_ftilde",
            "ise_df_fhat",
            "ise_df_ftilde",
        ):
            row[f"mean_{key}"] = _mean(getattr(r, key) for r in ok)
        row["ratio_d"] = _ratio(row["mean_d_n_fhat"], row["mean_d_n_ftilde"])
        row["ratio_mise"] = _ratio(row["mean_ise_df_fhat"], row["mean_ise_df_ftilde"])
        row["ratio_ise_dz"] = _ratio(row["mean_ise_fhat"], row["mean_ise_ftilde"])
        alphas = sorted({a for r in ok for a in r.cover})
        for a in alphas:
            for i, kind in enumerate(BAND_KINDS):
                row[f"cover_{kind}_{a:g}"] = _mean(float(r.cover[a][i]) for r in ok)
        ratios = [r.d_n_fhat / r.d_n_ftilde for r in ok if r.d_n_ftilde > 0]
        row["median_ratio"] = median(ratios) if ratios else math.nan
        rows.append(row)
    return rows


def ratio_rows(records: Sequence[ReplicationRecord]) -> list[dict]:
    """Per-replication ``D_n(fhat) / D_n(ftilde)``, the boxplot data."""
    return [
        {
            "phi": " ".join(repr(v) for v in r.phi),
            "law": r.law,
            "n": r.n,
            "rep_id": r.rep_id,
            "ratio": r.d_n_fhat / r.d_n_ftilde,
        }
        for r in records
        if not r.failed and r.d_n_ftilde > 0
    ]


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

_KEYS = {
    "phi",
    "law",
    "n",
    "replications",
    "alpha",
    "seed",
    "output_dir",
    "share_innovations",
    "bandwidth",
    "sigma",
}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in {"1", "true", "yes", "on"}:
        return True
    if t in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_config(path) -> list[ExperimentConfig]:
    """Parse a ``key = value`` config file into one config per AR model.

    ``phi`` lists one or more models separated by ``;`` with coefficients
    separated by ``,``; ``n`` and ``alpha`` are comma lists.  Relative
    ``output_dir`` values resolve against the config file's directory.
    """
    path = Path(path)
    raw: dict[str, tuple[str, int]] = {}
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        raw[key] = (val, lineno)
    end = len(lines) + 1
    for key in ("phi", "n", "replications"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}", end)

    def parse(key, conv, default=None):
        if key not in raw:
            return default
        val, lineno = raw[key]
        try:
            return conv(val)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None

    def floats(text):
        return tuple(float(v) for v in text.split(",") if v.strip())

    def ints(text):
        return tuple(int(v) for v in text.split(",") if v.strip())

    def models(text):
        return [tuple(float(c) for c in m.split(",")) for m in text.split(";") if m.strip()]

    def bandwidth(text):
        return None if text.strip().lower() in {"", "rule", "iqr"} else float(text)

    sigma = parse("sigma", float, 1.0)
    try:
        model_list = [ArModel(phi, sigma) for phi in parse("phi", models)]
    except ValueError as exc:
        raise ConfigError(str(exc), raw["phi"][1]) from None
    for m in model_list:
        if not arprocess.check_causal(m.phi):
            raise ConfigError(f"phi={list(m.phi)} is not causal", raw["phi"][1])
    law = parse("law", law_from_name, law_from_name("normal"))
    out = parse("output_dir", lambda s: Path(s).expanduser())
    if out is not None and not out.is_absolute():
        out = path.parent / out
    common = dict(
        law=law,
        n_list=parse("n", ints),
        replications=parse("replications", int),
        alpha_list=parse("alpha", floats, (0.01, 0.05, 0.1, 0.2)),
        seed=parse("seed", int, 0),
        output_dir=out,
        share_innovations=parse("share_innovations", _parse_bool, False),
        bandwidth=parse("bandwidth", bandwidth),
    )
    try:
        return [ExperimentConfig(model=m, **common) for m in model_list]
    except ValueError as exc:
        raise ConfigError(str(exc), end) from None


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path: Path, rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if not rows:
            return
        header = list(rows[0])
        for r in rows[1:]:
            header += [k for k in r if k not in header]
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r.get(k, "")) for k in header])


def _record_row(r: ReplicationRecord, alphas: Sequence[float]) -> dict:
    row = {
        "phi": " ".join(repr(v) for v in r.phi),
        "law": r.law,
        "n": r.n,
        "rep_id": r.rep_id,
        "failed": r.failed,
        "error": r.error,
        "phi_hat": " ".join(repr(v) for v in r.phi_hat),
    }
    for key in (
        "h_hat",
        "h_tilde",
        "d_n_fhat",
        "d_n_ftilde",
        "d_n_fn",
        "d_n_fhatn",
        "d_hat_tilde",
        "ise_fhat",
        "ise_ftilde",
        "ise_df_fhat",
        "ise_df_ftilde",
    ):
        row[key] = getattr(r, key)
    for a in alphas:
        flags = r.cover.get(a, ("", "", ""))
        for kind, flag in zip(BAND_KINDS, flags):
            row[f"cover_{kind}_{a:g}"] = flag
    return row


def _model_tag(model: ArModel) -> str:
    return "phi_" + "_".join(f"{c:g}" for c in model.phi)


def write_band_curves(cfg: ExperimentConfig, n: int, alpha: float, path: Path, rep_id: int = 0):
    """Curves of one replication: z, F_true, F_tilde, F_hat, lower, upper, F_n."""
    est = build_estimators(cfg, n, rep_id)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", kolmogorov.SmallSampleWarning)
        band = kolmogorov.build_band(est.fhat, n, alpha)
    z = est.fhat.grid()
    lower, center, upper = band.evaluate(z)
    cols = [z, reference_cdf(cfg.law, z), est.ftilde(z), center, lower, upper, est.fn(z)]
    with path.open("w", newline="") as fh:
        fh.write(f"# phi={','.join(repr(c) for c in cfg.model.phi)}\n")
        fh.write(f"# law={cfg.law.name}\n# n={n}\n# alpha={alpha!r}\n# rep_id={rep_id}\n")
        fh.write(f"# halfwidth={band.halfwidth!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z", "F_true", "F_tilde", "F_hat", "lower", "upper", "F_n"])
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])


def write_outputs(
    configs: Sequence[ExperimentConfig], records: Sequence[ReplicationRecord], out_dir
) -> dict[str, Path]:
    """Write replications.csv, summary.csv, ratios.csv and per-model band curve files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    alphas = sorted({a for c in configs for a in c.alpha_list})
    paths = {
        "replications": out / "replications.csv",
        "summary": out / "summary.csv",
        "ratios": out / "ratios.csv",
    }
    _write_rows(paths["replications"], [_record_row(r, alphas) for r in records])
    _write_rows(paths["summary"], summarize(records))
    _write_rows(paths["ratios"], ratio_rows(records))
    for cfg in configs:
        bdir = out / "bands" / _model_tag(cfg.model)
        bdir.mkdir(parents=True, exist_ok=True)
        for n in cfg.n_list:
            for a in cfg.alpha_list:
                p = bdir / f"band_{n}_{a:g}.csv"
                try:
                    write_band_curves(cfg, n, a, p)
                except DegenerateDataError as exc:
                    log.warning("no band curves for %s n=%d: %s", cfg.model.phi, n, exc)
                    continue
                paths[f"band:{_model_tag(cfg.model)}:{n}:{a:g}"] = p
    return paths


def format_summary(rows: Sequence[dict]) -> str:
    alphas = sorted(
        {float(k.split("_")[-1]) for r in rows for k in r if k.startswith("cover_fhat_")}
    )
    head = f"{'phi':>14} {'law':>8} {'n':>6} {'Dn(Fhat)':>9} {'ratio':>7} {'MISE':>8} {'ratio':>7}"
    for a in alphas:
        head += f"  {'a=' + format(a, 'g'):>19}"
    lines = [head]
    for r in rows:
        line = (
            f"{r['phi']:>14} {r['law']:>8} {r['n']:>6} {r['mean_d_n_fhat']:9.4f} "
            f"{r['ratio_d']:7.4f} {r['mean_ise_df_fhat']:8.4f} {r['ratio_mise']:7.4f}"
        )
        for a in alphas:
            c = [r[f"cover_{k}_{a:g}"] for k in ("fhat", "fn", "ftilde")]
            line += f"  {c[0]:.3f} ({c[1]:.3f}) {c[2]:.3f}"
        if r["failed"]:
            line += f"  [{r['failed']} failed]"
        lines.append(line)
    lines.append("coverage cells: Fhat (F_n) Ftilde")
    return "\n".join(lines)
