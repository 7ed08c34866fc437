"""Experiment driver: temporal and spatial convergence sweeps with
self-convergence or exact plane-wave references, empirical-order
computation with saturation flagging, the twisted-flow-vs-oracle check,
and CSV / JSON report emission.

Sweep cells (one evolution each) are independent; when NLS_THREADS or the
machine allows more than one worker they run in a process pool, and the
aggregation order is fixed (sorted by parameter, then seed) so the output
is identical to a serial run.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DegenerateReportError
from .fields import SpectralField, norm_l2
from .initial import (
    PlaneWaveSolution,
    RegularityParams,
    plane_wave_at,
    project_initial,
    random_low_reg,
)
from .scheme import (
    SchemeParams,
    step_direct_oracle,
    step_lie_splitting,
    step_twisted,
    step_untwisted,
    evolve,
)

SWEEP_KINDS = ("temporal-sweep", "spatial-sweep", "single-run", "oracle-check")
REFERENCES = ("fine-tau", "exact-plane-wave")
BASELINES = ("none", "lie")
CSV_COLUMNS = (
    "experiment_id",
    "kind",
    "gamma",
    "tau",
    "n_modes",
    "t_final",
    "seed",
    "error_l2",
    "runtime_ms",
    "saturated",
)

# Factor by which the self-convergence reference must out-resolve the sweep.
TEMPORAL_REF_FACTOR = 8
SPATIAL_REF_FACTOR = 4
ORACLE_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    """One reproducible experiment; field semantics depend on kind.

    Temporal sweeps vary tau_list at fixed n_modes; spatial sweeps vary
    n_list at fixed tau.  Derived defaults: tau_ref = min(tau_list)/8,
    n_ref = 4*max(n_list), k_max = 2*n_modes (temporal) or 2*n_ref
    (spatial).
    """

    kind: str
    gamma: float
    seeds: tuple[int, ...] = (1, 2, 3)
    tau_list: tuple[float, ...] = ()
    n_list: tuple[int, ...] = ()
    t_final: float = 1.0
    reference: str = "fine-tau"
    n_modes: int | None = None
    tau: float | None = None
    tau_ref: float | None = None
    n_ref: int | None = None
    k_max: int | None = None
    baseline: str = "none"
    plane_wave_amplitude: complex = 0.5
    plane_wave_number: int = 1

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}")
        if self.reference not in REFERENCES:
            raise ConfigurationError(f"unknown reference {self.reference!r}")
        if self.baseline not in BASELINES:
            raise ConfigurationError(f"unknown baseline {self.baseline!r}")
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if self.kind in ("temporal-sweep", "spatial-sweep"):
            if self.t_final <= 0:
                raise ConfigurationError("sweeps require t_final > 0")
        if self.kind == "temporal-sweep":
            _require_monotone(self.tau_list, "tau_list")
        if self.kind == "spatial-sweep":
            _require_monotone(self.n_list, "n_list")


@dataclass(frozen=True)
class SweepRow:
    """One measured error; seed None marks a geometric-mean aggregate."""

    tau: float
    n_modes: int
    seed: int | None
    error_l2: float
    runtime_ms: float
    saturated: bool = False


@dataclass(frozen=True)
class ConvergenceReport:
    experiment_id: str
    kind: str
    gamma: float
    t_final: float
    parameter_name: str  # "tau" or "n_modes"
    rows: tuple[SweepRow, ...]
    slopes: tuple[float, ...]
    fitted_slope: float | None

    def aggregate_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.seed is None]


def _require_monotone(values: Sequence, name: str) -> None:
    if len(values) == 0:
        raise ConfigurationError(f"{name} must be nonempty")
    diffs = np.diff(np.asarray(values, dtype=float))
    if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ConfigurationError(f"{name} must be strictly monotone")


def error_l2(a: SpectralField, b: SpectralField) -> float:
    """L2 norm of the coefficient difference, on the common padded range."""
    return norm_l2(a - b)


def eoc(resolutions: Sequence[float], errors: Sequence[float]):
    """Pairwise convergence orders and the least-squares log-log slope.

    resolutions must be strictly monotone and positive (tau for temporal
    data, 1/N for spatial data); errors must be positive.
    """
    res = np.asarray(resolutions, dtype=float)
    err = np.asarray(errors, dtype=float)
    if res.size < 2:
        raise DegenerateReportError("need at least two rows to fit a slope")
    _require_monotone(res, "resolutions")
    if np.any(res <= 0) or np.any(err <= 0):
        raise ValueError("resolutions and errors must be positive")
    slopes = np.log2(err[:-1] / err[1:]) / np.log2(res[:-1] / res[1:])
    fitted = float(np.polyfit(np.log(res), np.log(err), 1)[0])
    return [float(s) for s in slopes], fitted


def flag_saturated(
    resolutions: Sequence[float],
    errors: Sequence[float],
    ref_resolution: float | None,
) -> np.ndarray:
    """Mark rows too close to the reference's own error floor.

    The floor is estimated by extrapolating the sweep's decay (median of
    pairwise orders, anchored at the coarsest row) down to the reference
    resolution; a sweep whose fine end has gone flat (final pairwise order
    below half the median order) is additionally floored at its smallest
    error.  Rows within a factor 2 of the floor are unreliable.  A flat
    sweep therefore flags everything, and a clean power law flags nothing.
    """
    res = np.asarray(resolutions, dtype=float)
    err = np.asarray(errors, dtype=float)
    flags = ~(err > 0)  # exact-zero errors are degenerate by definition
    if ref_resolution is None or res.size < 2 or np.all(flags):
        return flags
    order = np.argsort(-res)  # coarse first
    r, e = res[order], err[order]
    ok = e > 0
    if np.count_nonzero(ok) < 2:
        return flags
    r, e = r[ok], e[ok]
    pair = np.log2(e[:-1] / e[1:]) / np.log2(r[:-1] / r[1:])
    pair = pair[np.isfinite(pair)]
    slope = float(np.median(pair)) if pair.size else 0.0
    if slope <= 0:
        floor = float(np.min(e))
    else:
        floor = float(e[0] * (ref_resolution / r[0]) ** slope)
        if pair[-1] < 0.5 * slope:
            floor = max(floor, float(np.min(e)))
    flags |= err <= 2.0 * floor
    return flags


# ---------------------------------------------------------------------------
# sweep execution


def _worker_count(n_cells: int) -> int:
    env = os.environ.get("NLS_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_cells))


def _evolve_cell(args):
    """Run one evolution; module-level so process pools can pickle it."""
    coeffs, cutoff, tau, n_modes, t_final, baseline = args
    u0 = SpectralField(np.asarray(coeffs), cutoff)
    params = SchemeParams(tau=tau, n_modes=n_modes, t_final=t_final)
    stepper = None
    if baseline == "lie":
        stepper = lambda s: step_lie_splitting(s, params)
    start = time.perf_counter()
    final, _ = evolve(u0, params, stepper=stepper)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    return final.coeffs, elapsed_ms


def _run_cells(cells: list) -> list:
    workers = _worker_count(len(cells))
    if workers == 1:
        return [_evolve_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evolve_cell, cells))


def _geometric_mean(values: np.ndarray) -> float:
    if np.any(values <= 0):
        return 0.0
    return float(np.exp(np.mean(np.log(values))))


def _initial_datum(config: ExperimentConfig, seed: int, k_max: int) -> SpectralField:
    if config.reference == "exact-plane-wave":
        sol = PlaneWaveSolution(config.plane_wave_amplitude, config.plane_wave_number)
        return plane_wave_at(sol, 0.0)
    return random_low_reg(RegularityParams(gamma=config.gamma, seed=seed, k_max=k_max))


def temporal_sweep(config: ExperimentConfig) -> ConvergenceReport:
    """Error at T for each tau against a reference at fixed mode count."""
    if config.kind != "temporal-sweep":
        raise ConfigurationError(f"expected temporal-sweep config, got {config.kind!r}")
    if config.n_modes is None:
        raise ConfigurationError("temporal sweeps need n_modes")
    n = config.n_modes
    taus = sorted(config.tau_list, reverse=True)  # coarse first
    seeds = sorted(config.seeds)
    t_final = config.t_final

    tau_ref = None
    if config.reference == "fine-tau":
        tau_ref = config.tau_ref if config.tau_ref is not None else min(taus) / TEMPORAL_REF_FACTOR
        if tau_ref * TEMPORAL_REF_FACTOR > min(taus) * (1 + 1e-12):
            raise ConfigurationError(
                f"reference step {tau_ref} is not {TEMPORAL_REF_FACTOR}x finer "
                f"than the sweep minimum {min(taus)}"
            )

    k_max = config.k_max if config.k_max is not None else 2 * n
    data = {
        seed: project_initial(_initial_datum(config, seed, k_max), n) for seed in seeds
    }

    if config.reference == "exact-plane-wave":
        sol = PlaneWaveSolution(config.plane_wave_amplitude, config.plane_wave_number)
        exact = plane_wave_at(sol, t_final)
        references = {seed: exact for seed in seeds}
    else:
        cells = [
            (data[seed].coeffs, n, tau_ref, n, t_final, config.baseline)
            for seed in seeds
        ]
        results = _run_cells(cells)
        references = {
            seed: SpectralField(res[0], n) for seed, res in zip(seeds, results)
        }

    cells = [
        (data[seed].coeffs, n, tau, n, t_final, config.baseline)
        for tau in taus
        for seed in seeds
    ]
    results = _run_cells(cells)

    rows: list[SweepRow] = []
    agg_errors: list[float] = []
    idx = 0
    per_tau: list[list[SweepRow]] = []
    for tau in taus:
        seed_rows = []
        for seed in seeds:
            coeffs, ms = results[idx]
            idx += 1
            err = error_l2(SpectralField(coeffs, n), references[seed])
            seed_rows.append(SweepRow(tau, n, seed, err, ms))
        per_tau.append(seed_rows)
        agg_errors.append(_geometric_mean(np.array([r.error_l2 for r in seed_rows])))

    ref_resolution = tau_ref  # None for the exact reference
    flags = flag_saturated(taus, agg_errors, ref_resolution)
    for tau, seed_rows, err, flag in zip(taus, per_tau, agg_errors, flags):
        rows.extend(
            SweepRow(r.tau, r.n_modes, r.seed, r.error_l2, r.runtime_ms, bool(flag))
            for r in seed_rows
        )
        mean_ms = float(np.mean([r.runtime_ms for r in seed_rows]))
        rows.append(SweepRow(tau, n, None, err, mean_ms, bool(flag)))

    slopes, fitted = _fit_unsaturated(taus, agg_errors, flags)
    exp_id = _experiment_id(config, f"N{n}")
    return ConvergenceReport(
        experiment_id=exp_id,
        kind=config.kind,
        gamma=config.gamma,
        t_final=t_final,
        parameter_name="tau",
        rows=tuple(rows),
        slopes=tuple(slopes),
        fitted_slope=fitted,
    )


def spatial_sweep(config: ExperimentConfig) -> ConvergenceReport:
    """Error at T for each mode count N against a finer-N reference run."""
    if config.kind != "spatial-sweep":
        raise ConfigurationError(f"expected spatial-sweep config, got {config.kind!r}")
    if config.tau is None:
        raise ConfigurationError("spatial sweeps need a fixed tau")
    if config.reference != "fine-tau":
        raise ConfigurationError("spatial sweeps compare against a finer-N run")
    tau = config.tau
    ns = sorted(config.n_list)
    seeds = sorted(config.seeds)
    t_final = config.t_final

    n_ref = config.n_ref if config.n_ref is not None else SPATIAL_REF_FACTOR * max(ns)
    if n_ref < SPATIAL_REF_FACTOR * max(ns):
        raise ConfigurationError(
            f"reference cutoff {n_ref} must be >= {SPATIAL_REF_FACTOR}x the "
            f"sweep maximum {max(ns)}"
        )
    k_max = config.k_max if config.k_max is not None else 2 * n_ref

    data = {seed: _initial_datum(config, seed, k_max) for seed in seeds}

    ref_cells = [
        (project_initial(data[seed], n_ref).coeffs, n_ref, tau, n_ref, t_final, config.baseline)
        for seed in seeds
    ]
    ref_results = _run_cells(ref_cells)
    references = {
        seed: SpectralField(res[0], n_ref) for seed, res in zip(seeds, ref_results)
    }

    cells = [
        (project_initial(data[seed], n).coeffs, n, tau, n, t_final, config.baseline)
        for n in ns
        for seed in seeds
    ]
    results = _run_cells(cells)

    rows: list[SweepRow] = []
    agg_errors: list[float] = []
    per_n: list[list[SweepRow]] = []
    idx = 0
    for n in ns:
        seed_rows = []
        for seed in seeds:
            coeffs, ms = results[idx]
            idx += 1
            err = error_l2(SpectralField(coeffs, n), references[seed])
            seed_rows.append(SweepRow(tau, n, seed, err, ms))
        per_n.append(seed_rows)
        agg_errors.append(_geometric_mean(np.array([r.error_l2 for r in seed_rows])))

    resolutions = [1.0 / n for n in ns]
    flags = flag_saturated(resolutions, agg_errors, 1.0 / n_ref)
    for n, seed_rows, err, flag in zip(ns, per_n, agg_errors, flags):
        rows.extend(
            SweepRow(r.tau, r.n_modes, r.seed, r.error_l2, r.runtime_ms, bool(flag))
            for r in seed_rows
        )
        mean_ms = float(np.mean([r.runtime_ms for r in seed_rows]))
        rows.append(SweepRow(tau, n, None, err, mean_ms, bool(flag)))

    slopes, fitted = _fit_unsaturated(resolutions, agg_errors, flags)
    exp_id = _experiment_id(config, f"tau{tau:g}")
    return ConvergenceReport(
        experiment_id=exp_id,
        kind=config.kind,
        gamma=config.gamma,
        t_final=t_final,
        parameter_name="n_modes",
        rows=tuple(rows),
        slopes=tuple(slopes),
        fitted_slope=fitted,
    )


def _fit_unsaturated(resolutions, errors, flags):
    res = [r for r, f in zip(resolutions, flags) if not f]
    err = [e for e, f in zip(errors, flags) if not f]
    if len(res) < 2:
        return [], None
    return eoc(res, err)


def _experiment_id(config: ExperimentConfig, detail: str) -> str:
    seeds = "+".join(str(s) for s in sorted(config.seeds))
    parts = [
        config.kind,
        f"g{config.gamma:g}",
        detail,
        f"T{config.t_final:g}",
        f"seeds{seeds}",
        config.reference,
    ]
    if config.baseline != "none":
        parts.append(config.baseline)
    return "-".join(parts)


# ---------------------------------------------------------------------------
# oracle check


@dataclass(frozen=True)
class OracleCheckResult:
    n_modes: int
    trials: int
    max_rel_diff: float
    tolerance: float
    passed: bool


def oracle_check(
    n_modes: int,
    trials: int,
    seed: int,
    step_fn: Callable[[SpectralField, float, SchemeParams], SpectralField] | None = None,
    tolerance: float = ORACLE_TOLERANCE,
) -> OracleCheckResult:
    """Compare the FFT-based twisted step against the direct triple sum.

    Each trial draws a random field with mildly decaying coefficients, a
    dyadic step size tau in [2^-8, 2^-3] and a start time t_n in [0, 4),
    all from one seeded generator; the reported figure is the worst
    relative sup-norm difference across trials.
    """
    gen = np.random.Generator(np.random.PCG64(seed))
    stepper = step_fn if step_fn is not None else step_twisted
    k = np.arange(-n_modes, n_modes + 1)
    envelope = (1.0 + np.abs(k)) ** -1.0
    worst = 0.0
    for _ in range(trials):
        draws = gen.uniform(-1.0, 1.0, size=(2, 2 * n_modes + 1))
        v = SpectralField(envelope * (draws[0] + 1j * draws[1]), n_modes)
        tau = float(2.0 ** -int(gen.integers(3, 9)))
        t_n = float(gen.uniform(0.0, 4.0))
        params = SchemeParams(tau=tau, n_modes=n_modes, t_final=0.0)
        got = stepper(v, t_n, params)
        want = step_direct_oracle(v, t_n, params)
        scale = float(np.max(np.abs(want.coeffs)))
        diff = float(np.max(np.abs((got - want).coeffs)))
        worst = max(worst, diff / scale)
    return OracleCheckResult(
        n_modes=n_modes,
        trials=trials,
        max_rel_diff=worst,
        tolerance=tolerance,
        passed=worst <= tolerance,
    )


# ---------------------------------------------------------------------------
# timing probe


def median_step_ms(n_modes: int, n_steps: int = 20, seed: int = 0) -> float:
    """Median wall time of one untwisted step at the given mode count."""
    u = random_low_reg(RegularityParams(gamma=1.0, seed=seed, k_max=n_modes))
    params = SchemeParams(tau=2.0**-8, n_modes=n_modes, t_final=0.0)
    state = u
    for _ in range(2):  # warm caches and twiddle tables
        state = step_untwisted(state, params)
    times = []
    for _ in range(n_steps):
        start = time.perf_counter()
        state = step_untwisted(state, params)
        times.append((time.perf_counter() - start) * 1e3)
    return float(np.median(times))


# ---------------------------------------------------------------------------
# report output


def _row_record(report: ConvergenceReport, row: SweepRow) -> dict:
    return {
        "experiment_id": report.experiment_id,
        "kind": report.kind,
        "gamma": report.gamma,
        "tau": row.tau,
        "n_modes": row.n_modes,
        "t_final": report.t_final,
        "seed": "geomean" if row.seed is None else row.seed,
        "error_l2": row.error_l2,
        "runtime_ms": row.runtime_ms,
        "saturated": row.saturated,
    }


def write_csv(reports: Sequence[ConvergenceReport], path) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for report in reports:
        for row in report.rows:
            rec = _row_record(report, row)
            lines.append(
                ",".join(
                    [
                        rec["experiment_id"],
                        rec["kind"],
                        repr(rec["gamma"]),
                        repr(rec["tau"]),
                        str(rec["n_modes"]),
                        repr(rec["t_final"]),
                        str(rec["seed"]),
                        repr(rec["error_l2"]),
                        f"{rec['runtime_ms']:.3f}",
                        "true" if rec["saturated"] else "false",
                    ]
                )
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def report_to_dict(report: ConvergenceReport) -> dict:
    return {
        "experiment_id": report.experiment_id,
        "kind": report.kind,
        "gamma": report.gamma,
        "t_final": report.t_final,
        "parameter": report.parameter_name,
        "fitted_slope": report.fitted_slope,
        "slopes": list(report.slopes),
        "rows": [_row_record(report, row) for row in report.rows],
    }


def write_json(reports: Sequence[ConvergenceReport], path) -> None:
    payload = {"report": {"reports": [report_to_dict(r) for r in reports]}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
