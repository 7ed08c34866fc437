"""Acceptance suite: one test per criterion of the build contract, each
printing a single PASS/FAIL line (run pytest with -s to see them live).

The two EOC tests also write their CSV/JSON reports into artifacts/ at the
repository root; the figures package renders its panels from those files.
Run this suite before the figures suite.
"""

import time
from pathlib import Path

import numpy as np

from torusnls import (
    ExperimentConfig,
    PlaneWaveSolution,
    RegularityParams,
    SchemeParams,
    SpectralField,
    constant_field,
    eoc,
    evolve,
    evolve_twisted,
    median_step_ms,
    norm_l2,
    oracle_check,
    plane_wave_at,
    project_initial,
    random_low_reg,
    spatial_sweep,
    step_untwisted,
    temporal_sweep,
    write_csv,
    write_json,
)

ARTIFACTS = Path(__file__).resolve().parent.parent / "artifacts"


def criterion(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}: {name} ({detail})"
    print(line, flush=True)
    assert ok, line


def test_oracle_equivalence():
    # N in {4, 8, 16}, 20 seeded random fields each, twisted step vs the
    # direct triple sum, relative sup tolerance 1e-10, under 10 s total
    start = time.perf_counter()
    worst = 0.0
    for n in (4, 8, 16):
        result = oracle_check(n_modes=n, trials=20, seed=1000 + n)
        worst = max(worst, result.max_rel_diff)
    elapsed = time.perf_counter() - start
    criterion(
        "oracle equivalence",
        worst <= 1e-10 and elapsed < 10.0,
        f"max rel sup diff {worst:.2e}, {elapsed:.2f}s",
    )


def test_flow_conjugation_16_steps():
    rng = np.random.default_rng(8)
    n = 8
    k = np.arange(-n, n + 1)
    u0 = SpectralField(
        (rng.uniform(-1, 1, 2 * n + 1) + 1j * rng.uniform(-1, 1, 2 * n + 1))
        * (1.0 + np.abs(k)) ** -1.0,
        n,
    )
    tau = 2.0**-5
    params = SchemeParams(tau=tau, n_modes=n, t_final=16 * tau)
    start = time.perf_counter()
    direct, _ = evolve(u0, params)
    twisted = evolve_twisted(u0, params)
    elapsed = time.perf_counter() - start
    diff = float(np.max(np.abs((direct - twisted).coeffs)))
    criterion(
        "flow conjugation (16 steps)",
        diff <= 1e-10 and elapsed < 1.0,
        f"sup diff {diff:.2e}, {elapsed:.2f}s",
    )


def test_constant_data_consistency():
    c = 0.7
    taus = [2.0**-j for j in range(4, 11)]
    start = time.perf_counter()
    errs = []
    for tau in taus:
        params = SchemeParams(tau=tau, n_modes=2, t_final=0.0)
        out = step_untwisted(constant_field(c, 2), params)
        errs.append(abs(out.mode(0) - c * np.exp(-1j * tau * c * c)))
    _, fitted = eoc(taus, errs)
    elapsed = time.perf_counter() - start
    criterion(
        "constant-data consistency",
        fitted >= 1.9 and elapsed < 1.0,
        f"slope {fitted:.3f}, {elapsed:.2f}s",
    )


def test_plane_wave_convergence():
    start = time.perf_counter()
    config = ExperimentConfig(
        kind="temporal-sweep",
        gamma=1.0,
        seeds=(1,),
        tau_list=tuple(2.0**-j for j in range(4, 10)),
        t_final=1.0,
        n_modes=64,
        reference="exact-plane-wave",
        plane_wave_amplitude=0.5,
        plane_wave_number=1,
    )
    report = temporal_sweep(config)
    elapsed = time.perf_counter() - start
    criterion(
        "plane-wave temporal convergence",
        0.9 <= report.fitted_slope <= 1.1 and elapsed < 30.0,
        f"fitted slope {report.fitted_slope:.4f}, {elapsed:.1f}s",
    )


def test_temporal_eoc_rate_bands():
    bands = {1.0: (0.85, np.inf), 0.8: (0.55, 1.1), 0.6: (0.30, 1.0)}
    reports = []
    fits = {}
    start = time.perf_counter()
    for gamma in (0.6, 0.8, 1.0):
        config = ExperimentConfig(
            kind="temporal-sweep",
            gamma=gamma,
            seeds=(1, 2, 3),
            tau_list=tuple(2.0**-j for j in range(6, 12)),
            t_final=1.0,
            n_modes=2**10,
        )
        report = temporal_sweep(config)
        reports.append(report)
        fits[gamma] = report.fitted_slope
    elapsed = time.perf_counter() - start
    ARTIFACTS.mkdir(exist_ok=True)
    write_csv(reports, ARTIFACTS / "temporal-eoc.csv")
    write_json(reports, ARTIFACTS / "temporal-eoc.json")
    ok = all(lo <= fits[g] <= hi for g, (lo, hi) in bands.items())
    criterion(
        "temporal EOC rate bands",
        ok and elapsed < 900.0,
        "slopes "
        + ", ".join(f"gamma={g}: {fits[g]:.3f}" for g in sorted(fits))
        + f", {elapsed:.0f}s",
    )


def test_spatial_eoc():
    reports = []
    fits = {}
    start = time.perf_counter()
    for gamma in (0.6, 0.8, 1.0):
        config = ExperimentConfig(
            kind="spatial-sweep",
            gamma=gamma,
            seeds=(1, 2, 3),
            n_list=tuple(2**j for j in range(4, 10)),
            t_final=1.0,
            tau=2.0**-12,
            n_ref=2**11,
        )
        report = spatial_sweep(config)
        reports.append(report)
        fits[gamma] = report.fitted_slope
    elapsed = time.perf_counter() - start
    ARTIFACTS.mkdir(exist_ok=True)
    write_csv(reports, ARTIFACTS / "spatial-eoc.csv")
    write_json(reports, ARTIFACTS / "spatial-eoc.json")
    ok = all(abs(fits[g] - g) <= 0.3 for g in fits)
    criterion(
        "spatial EOC",
        ok and elapsed < 900.0,
        "slopes "
        + ", ".join(f"gamma={g}: {fits[g]:.3f}" for g in sorted(fits))
        + f", {elapsed:.0f}s",
    )


def test_mass_drift_first_order():
    # the scheme is not exactly mass conserving; L2 convergence forces the
    # terminal mass drift to vanish with tau
    u0 = project_initial(random_low_reg(RegularityParams(1.0, 7, 256)), 128)
    m0 = norm_l2(u0)
    taus = [2.0**-j for j in range(4, 10)]
    drifts = []
    for tau in taus:
        final, _ = evolve(u0, SchemeParams(tau=tau, n_modes=128, t_final=1.0))
        drifts.append(abs(norm_l2(final) - m0))
    _, fitted = eoc(taus, drifts)
    criterion("mass-drift decay", fitted >= 0.8, f"slope {fitted:.3f}")


def test_step_cost_scaling():
    ms_12 = median_step_ms(2**12, n_steps=20)
    ms_13 = median_step_ms(2**13, n_steps=20)
    ratio = ms_13 / ms_12
    criterion(
        "per-step cost scaling",
        ratio <= 2.6,
        f"median {ms_12:.2f} ms -> {ms_13:.2f} ms, ratio {ratio:.2f}",
    )
