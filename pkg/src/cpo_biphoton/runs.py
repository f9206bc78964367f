"""Scenario runners behind the command-line subcommands.

Each runner takes a :class:`RunConfig`, writes its files under ``cfg.out``
and returns what it wrote, so the same entry points serve the CLI and tests.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import correlations as corr
from .config import RunConfig
from .correlations import Mode
from .errors import ConfigError, RegimeError
from .floquet import sideband_response
from .params import SystemParams, derive_params, validate_regime
from .propagation import thin_medium_coefficients, transfer_coefficients
from .records import CurveRecord, write_json
from .susceptibility import build_grid, susceptibilities

log = logging.getLogger(__name__)

ORACLE_TOLERANCE = 0.05
AUDIT_GAMMA_CA = (1e-3, 1e-4, 1e-5)


def check_regime(p: SystemParams, cfg: RunConfig):
    report = validate_regime(p, cfg.threshold)
    failed = report.failed_checks()
    if failed:
        msg = f"regime checks failed for {p}: {', '.join(failed)}"
        if cfg.strict:
            raise RegimeError(msg)
        log.warning(msg)
    return report


def _tau_grid(p: SystemParams, cfg: RunConfig):
    return corr.default_tau_grid(p, cfg.tau_span_W, cfg.tau_n_log)


def _correlate(p: SystemParams, cfg: RunConfig, mode: Mode, tau=None):
    grid = None if mode is Mode.CLOSED else build_grid(p, cfg.grid)
    tau = _tau_grid(p, cfg) if tau is None else tau
    return corr.g2(p, tau, mode, grid=grid, rtol=cfg.rtol)


def _provenance(result: corr.CorrelationResult) -> dict:
    return {"mode": result.mode.value, "convergence": result.convergence,
            "G1": result.G1, "G2": result.G2, "zeta_norm": result.zeta_norm}


# ---------------------------------------------------------------------------

def run_fig2(cfg: RunConfig):
    """Normalized correlation for a resonant and a detuned pump.

    Both curves are divided by the same constant ``|beta(0)|^2 L^2``
    evaluated for the resonant pump.
    """
    mode = cfg.mode_or(Mode.CLOSED)
    base = cfg.params
    cases = [("Omega0", base.replace(Omega=0.0)), ("Omega10", base.replace(Omega=cfg.fig2_Omega))]
    for _, p in cases:
        check_regime(p, cfg)
    tau = _tau_grid(cases[1][1], cfg)
    shared = corr.zeta_norm(cases[0][1])
    echo = cfg.echo()
    records, summary, columns = [], {}, {"tau": tau}
    for label, p in cases:
        result = _correlate(p, cfg, mode, tau)
        t, phi, g = result.positive()
        scaled = 1.0 + (g - 1.0) * (result.zeta_norm / shared if shared > 0 else 0.0)
        columns[f"g2_{label}"] = scaled
        records.append(CurveRecord(
            f"fig2_{label}", echo,
            {"tau": t, "phi_re": phi.real, "phi_im": phi.imag, "g2": g, "g2_fig": scaled},
            {**_provenance(result), "Omega": p.Omega}))
        m = corr.metrics(result)
        summary[label] = {"Omega": p.Omega, "metrics": m.as_dict(), **_provenance(result)}
    combined = CurveRecord("fig2", echo, columns, {"mode": mode.value, "shared_zeta_norm": shared})
    paths = [combined.write_csv(cfg.out / "fig2.csv")]
    paths += [r.write_csv(cfg.out / f"{r.name}.csv") for r in records]
    paths.append(write_json(cfg.out / "fig2_metrics.json", "fig2_metrics", echo,
                            {"shared_zeta_norm": shared, "curves": summary}))
    return records, paths


# ---------------------------------------------------------------------------

def _sweep_point(args):
    p, cfg, mode = args
    report = check_regime(p, cfg)
    result = _correlate(p, cfg, mode)
    m = corr.metrics(result)
    return {**m.as_dict(), "regime_ok": report.all_ok,
            "nodes": result.convergence.get("phi", {}).get("nodes", 0)}


def sweep_points(cfg: RunConfig) -> list:
    """Cartesian product of the sweep axes, first axis slowest."""
    names = [name for name, _ in cfg.sweep]
    total = int(np.prod([len(v) for _, v in cfg.sweep])) if cfg.sweep else 1
    if total > cfg.max_points:
        raise ConfigError(f"sweep has {total} points, budget is {cfg.max_points}")
    points = []
    for combo in itertools.product(*[values for _, values in cfg.sweep]):
        changes = dict(zip(names, combo))
        try:
            points.append((changes, cfg.params.replace(**changes)))
        except ValueError as exc:
            raise ConfigError(f"sweep point {changes}: {exc}") from exc
    return points


def run_sweep(cfg: RunConfig):
    mode = cfg.mode_or(Mode.THIN)
    points = sweep_points(cfg)
    jobs = [(p, cfg, mode) for _, p in points]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))  # map keeps sweep order
    else:
        rows = [_sweep_point(job) for job in jobs]
    names = [name for name, _ in cfg.sweep]
    metric_keys = ["peak_g2", "peak_tau", "dip_value", "coherence_width", "visibility",
                   "oscillation_freq"]
    columns = {"index": np.arange(len(rows), dtype=float)}
    for name in names:
        columns[name] = np.array([changes[name] for changes, _ in points], dtype=float)
    for key in metric_keys:
        columns[key] = np.array([np.nan if row[key] is None else row[key] for row in rows])
    columns["regime_ok"] = np.array([float(row["regime_ok"]) for row in rows])
    echo = cfg.echo()
    record = CurveRecord("sweep", echo, columns, {"mode": mode.value, "points": len(rows)})
    table = [{"index": i, **changes, **row} for i, ((changes, _), row) in enumerate(zip(points, rows))]
    paths = [record.write_csv(cfg.out / "sweep.csv"),
             write_json(cfg.out / "sweep.json", "sweep", echo, {"mode": mode.value, "rows": table})]
    return record, table, paths


# ---------------------------------------------------------------------------

def oracle_deviation(p: SystemParams, n: int = 41, span_W: float = 10.0) -> dict:
    """Max relative deviation of the harmonic-balance responses from the analytic ones."""
    W = derive_params(p).W
    delta = np.linspace(-span_W * W, span_W * W, n)
    exact = susceptibilities(delta, p)
    oracle = sideband_response(p, delta)
    out = {}
    for name in ("alpha1", "beta1", "alpha2", "beta2"):
        a, o = getattr(exact, name), getattr(oracle, name)
        out[name] = float(np.max(np.abs(o - a) / np.abs(a)))
    return out


def singles_audit(p: SystemParams, cfg: RunConfig, gamma_cas=AUDIT_GAMMA_CA) -> dict:
    """Ratio of the closed-form singles rate to the quadrature value."""
    ratios = {}
    for gca in gamma_cas:
        q = p.replace(gamma_ca=gca)
        quad = corr.singles_rates(q, Mode.THIN, build_grid(q, cfg.grid), cfg.rtol)
        ratios[repr(gca)] = corr.closed_form_singles(q) / quad.G1
    values = np.array(list(ratios.values()))
    spread = float(values.max() / values.min() - 1.0)
    return {"ratios": ratios, "spread": spread, "stable": spread < 0.01}


def run_validate(cfg: RunConfig):
    p = cfg.params
    regime = validate_regime(p, cfg.threshold)
    deviation = oracle_deviation(p)
    oracle_ok = max(deviation["alpha1"], deviation["beta1"]) < ORACLE_TOLERANCE
    audit = singles_audit(p, cfg)
    checks = {**{k: getattr(regime, k) for k in
                 ("cpo_regime_ok", "metastable_ok", "thin_medium_ok", "narrowband_ok")},
              "oracle_ok": oracle_ok, "singles_audit_stable": audit["stable"]}
    report = {
        "regime": regime.as_dict(),
        "oracle_max_rel_deviation": deviation,
        "oracle_tolerance": ORACLE_TOLERANCE,
        "singles_audit": audit,
        "checks": checks,
        "all_ok": all(checks.values()),
    }
    path = write_json(cfg.out / "validate.json", "validate", cfg.echo(), report)
    return report, path


# ---------------------------------------------------------------------------

def delta_nodes(cfg: RunConfig) -> np.ndarray:
    p = cfg.params
    if cfg.delta_min is not None or cfg.delta_max is not None:
        span = abs(p.Omega) + 20 * p.Gamma_ba
        lo = -span if cfg.delta_min is None else cfg.delta_min
        hi = span if cfg.delta_max is None else cfg.delta_max
        if hi <= lo:
            raise ConfigError("delta.max must exceed delta.min")
        return np.linspace(lo, hi, cfg.delta_n)
    W = derive_params(p).W
    span = abs(p.Omega) + 20 * p.Gamma_ba
    return np.unique(np.concatenate([np.linspace(-50 * W, 50 * W, 201),
                                     np.linspace(-span, span, cfg.delta_n)]))


def _complex_columns(prefix_values: dict) -> dict:
    cols = {}
    for name, values in prefix_values.items():
        cols[f"{name}_re"] = np.real(values)
        cols[f"{name}_im"] = np.imag(values)
    return cols


def run_susceptibility(cfg: RunConfig):
    p = cfg.params
    check_regime(p, cfg)
    delta = delta_nodes(cfg)
    q = susceptibilities(delta, p)
    record = CurveRecord("susceptibility", cfg.echo(), {"delta": delta, **_complex_columns(
        {"alpha1": q.alpha1, "alpha2": q.alpha2, "beta1": q.beta1, "beta2": q.beta2})})
    return record, record.write_csv(cfg.out / "susceptibility.csv")


def run_transfer(cfg: RunConfig):
    p = cfg.params
    check_regime(p, cfg)
    mode = cfg.mode_or(Mode.FULL)
    delta = delta_nodes(cfg)
    q = susceptibilities(delta, p)
    c = thin_medium_coefficients(q, p.L_tilde) if mode is Mode.THIN else transfer_coefficients(q, p.L_tilde)
    record = CurveRecord("transfer", cfg.echo(), {"delta": delta, **_complex_columns(
        {"A1": c.A1, "A2": c.A2, "B1": c.B1, "B2": c.B2})},
        {"mode": "thin" if mode is Mode.THIN else "full"})
    return record, record.write_csv(cfg.out / "transfer.csv")


def run_g2(cfg: RunConfig):
    p = cfg.params
    check_regime(p, cfg)
    mode = cfg.mode_or(Mode.THIN)
    result = _correlate(p, cfg, mode)
    m = corr.metrics(result)
    echo = cfg.echo()
    record = CurveRecord("g2", echo, {"tau": result.tau, "phi_re": result.phi.real,
                                      "phi_im": result.phi.imag, "g2": result.g2},
                         _provenance(result))
    paths = [record.write_csv(cfg.out / "g2.csv"),
             write_json(cfg.out / "g2_metrics.json", "g2_metrics", echo,
                        {"metrics": m.as_dict(), **_provenance(result)})]
    return record, m, paths
