"""Command-line driver.

Subcommands: ``run`` (single evolution with per-step monitoring),
``converge-time`` / ``converge-space`` (convergence sweeps), ``oracle-check``
(twisted step vs direct sum), ``dump-initial`` (serialize an initial datum).

Numbers accept dyadic notation (``2^-6``); list-valued flags take comma
separated values.  A flat ``key = value`` config file can supply any flag;
explicit command-line values win.  Exit codes: 0 success, 1 failed
oracle check, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .errors import ConfigurationError, TorusNlsError
from .fields import norm_hs, norm_l2, to_triples
from .harness import (
    ExperimentConfig,
    oracle_check,
    spatial_sweep,
    temporal_sweep,
    write_csv,
    write_json,
)
from .initial import RegularityParams, random_low_reg, project_initial
from .scheme import SchemeParams, StepObserver, evolve, step_lie_splitting

DEFAULT_TEMPORAL_TAUS = tuple(2.0**-j for j in range(6, 12))
DEFAULT_SPATIAL_NS = tuple(2**j for j in range(4, 10))
DEFAULT_SPATIAL_TAU = 2.0**-12
DEFAULT_SEEDS = (1, 2, 3)

_DYADIC = re.compile(r"^([+-]?\d+(?:\.\d+)?)\^([+-]?\d+)$")


class UsageError(Exception):
    """Flag-level problem; reported with the usage text, exit code 2."""


def _number(text: str) -> float:
    text = text.strip()
    m = _DYADIC.match(text)
    if m:
        return float(m.group(1)) ** int(m.group(2))
    return float(text)


def _int_number(text: str) -> int:
    value = _number(text)
    if value != int(value):
        raise UsageError(f"expected an integer, got {text!r}")
    return int(value)


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(_number(part) for part in text.split(",") if part.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(_int_number(part) for part in text.split(",") if part.strip())


def _load_config_file(path: Path) -> dict[str, str]:
    """Flat `key = value` pairs, keys named like the flags without dashes."""
    values: dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected `key = value`")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _merged(args: argparse.Namespace, key: str, default=None):
    """Explicit flag > config-file entry (raw string) > default."""
    cli_value = getattr(args, key.replace("-", "_"), None)
    if cli_value is not None:
        return cli_value
    file_values = getattr(args, "_file_values", {})
    if key in file_values:
        return file_values[key]
    return default


def _as_float(value) -> float:
    return _number(value) if isinstance(value, str) else float(value)


def _as_int(value) -> int:
    return _int_number(value) if isinstance(value, str) else int(value)


def _as_float_list(value) -> tuple[float, ...]:
    if isinstance(value, str):
        return _float_list(value)
    return tuple(float(v) for v in value)


def _as_int_list(value) -> tuple[int, ...]:
    if isinstance(value, str):
        return _int_list(value)
    return tuple(int(v) for v in value)


def _reference_name(value: str) -> str:
    names = {"fine-tau": "fine-tau", "plane-wave": "exact-plane-wave"}
    if value not in names:
        raise UsageError(f"--reference must be fine-tau or plane-wave, got {value!r}")
    return names[value]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusnls",
        description="Low-regularity integrator for the cubic NLS equation on the torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", type=Path, help="flat key=value config file")
        sp.add_argument("--gamma", help="Sobolev regularity (comma list for sweeps)")
        sp.add_argument("--t-final", help="final time T")
        sp.add_argument("--k-max", help="mode truncation of the random datum")
        sp.add_argument("--output", type=Path, help="output file path")
        sp.add_argument("--format", choices=("csv", "json"), dest="fmt")
        sp.add_argument("--baseline", choices=("none", "lie"))

    sp = sub.add_parser("run", help="single evolution with per-step monitoring")
    add_common(sp)
    sp.add_argument("--tau", help="time step")
    sp.add_argument("--n-modes", help="mode cutoff N")
    sp.add_argument("--seed", help="RNG seed")

    sp = sub.add_parser("converge-time", help="temporal convergence sweep")
    add_common(sp)
    sp.add_argument("--tau", help="comma list of step sizes (default 2^-6..2^-11)")
    sp.add_argument("--n-modes", help="fixed mode cutoff (default 2^10)")
    sp.add_argument("--seeds", "--seed", dest="seeds", help="comma list of seeds")
    sp.add_argument("--reference", help="fine-tau (default) or plane-wave")

    sp = sub.add_parser("converge-space", help="spatial convergence sweep")
    add_common(sp)
    sp.add_argument("--tau", help="fixed time step (default 2^-12)")
    sp.add_argument("--n-modes", help="comma list of cutoffs (default 2^4..2^9)")
    sp.add_argument("--seeds", "--seed", dest="seeds", help="comma list of seeds")

    sp = sub.add_parser("oracle-check", help="twisted step vs direct triple sum")
    sp.add_argument("--config", type=Path)
    sp.add_argument("--n-modes", help="mode cutoff (default 8)")
    sp.add_argument("--trials", help="number of random trials (default 20)")
    sp.add_argument("--seed", help="RNG seed (default 1)")

    sp = sub.add_parser("dump-initial", help="serialize a random initial datum")
    sp.add_argument("--config", type=Path)
    sp.add_argument("--gamma")
    sp.add_argument("--seed")
    sp.add_argument("--k-max")
    sp.add_argument("--output", type=Path, required=True)
    return parser


def _require(args, key, kind, converter):
    value = _merged(args, key)
    if value is None:
        raise UsageError(f"--{key} is required for {kind}")
    return converter(value)


def _write_reports(reports, args) -> None:
    output = _merged(args, "output")
    fmt = _merged(args, "fmt", "csv")
    if isinstance(fmt, str) and fmt not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {fmt!r}")
    if output is None:
        for report in reports:
            print(f"# {report.experiment_id}")
            for row in report.aggregate_rows():
                sat = " saturated" if row.saturated else ""
                print(
                    f"  {report.parameter_name}="
                    f"{row.tau if report.parameter_name == 'tau' else row.n_modes:g}"
                    f"  error_l2={row.error_l2:.6e}{sat}"
                )
            if report.fitted_slope is not None:
                print(f"  fitted slope: {report.fitted_slope:.4f}")
        return
    output = Path(output)
    if fmt == "csv":
        write_csv(reports, output)
        write_json(reports, output.with_suffix(".json"))
        print(f"wrote {output} and {output.with_suffix('.json')}")
    else:
        write_json(reports, output)
        print(f"wrote {output}")


def _cmd_run(args) -> int:
    gamma = _require(args, "gamma", "run", _as_float)
    tau = _require(args, "tau", "run", _as_float)
    n_modes = _require(args, "n-modes", "run", _as_int)
    t_final = _as_float(_merged(args, "t-final", 1.0))
    seed = _as_int(_merged(args, "seed", 1))
    k_max = _as_int(_merged(args, "k-max", 2 * n_modes))
    baseline = _merged(args, "baseline", "none")

    params = SchemeParams(tau=tau, n_modes=n_modes, t_final=t_final)
    u0 = project_initial(
        random_low_reg(RegularityParams(gamma=gamma, seed=seed, k_max=k_max)), n_modes
    )
    stepper = (lambda s: step_lie_splitting(s, params)) if baseline == "lie" else None
    final, observations = evolve(
        u0, params, observer=StepObserver(sobolev_exponent=gamma), stepper=stepper
    )

    output = _merged(args, "output")
    fmt = _merged(args, "fmt", "csv")
    if output is None:
        print(f"steps: {params.n_steps}")
        print(f"initial mass: {norm_l2(u0):.12f}")
        print(f"final mass:   {norm_l2(final):.12f}")
        print(f"final H^{gamma:g} norm: {norm_hs(final, gamma):.12f}")
        return 0
    output = Path(output)
    if fmt == "csv":
        lines = ["step,time,mass,sobolev_norm"]
        lines += [
            f"{o.step_index},{o.time!r},{o.mass!r},{o.sobolev_norm!r}"
            for o in observations
        ]
        output.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        payload = {
            "gamma": gamma,
            "tau": tau,
            "n_modes": n_modes,
            "t_final": t_final,
            "seed": seed,
            "observations": [
                {
                    "step": o.step_index,
                    "time": o.time,
                    "mass": o.mass,
                    "sobolev_norm": o.sobolev_norm,
                }
                for o in observations
            ],
        }
        output.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {output}")
    return 0


def _cmd_converge_time(args) -> int:
    gammas = _as_float_list(_require(args, "gamma", "converge-time", str))
    taus = _as_float_list(_merged(args, "tau", DEFAULT_TEMPORAL_TAUS))
    n_modes = _as_int(_merged(args, "n-modes", 2**10))
    t_final = _as_float(_merged(args, "t-final", 1.0))
    seeds = _as_int_list(_merged(args, "seeds", DEFAULT_SEEDS))
    reference = _reference_name(_merged(args, "reference", "fine-tau"))
    baseline = _merged(args, "baseline", "none")
    k_max = _merged(args, "k-max")

    reports = []
    for gamma in gammas:
        config = ExperimentConfig(
            kind="temporal-sweep",
            gamma=gamma,
            seeds=seeds,
            tau_list=taus,
            t_final=t_final,
            reference=reference,
            n_modes=n_modes,
            k_max=None if k_max is None else _as_int(k_max),
            baseline=baseline,
        )
        reports.append(temporal_sweep(config))
    _write_reports(reports, args)
    return 0


def _cmd_converge_space(args) -> int:
    gammas = _as_float_list(_require(args, "gamma", "converge-space", str))
    ns = _as_int_list(_merged(args, "n-modes", DEFAULT_SPATIAL_NS))
    tau = _as_float(_merged(args, "tau", DEFAULT_SPATIAL_TAU))
    t_final = _as_float(_merged(args, "t-final", 1.0))
    seeds = _as_int_list(_merged(args, "seeds", DEFAULT_SEEDS))
    baseline = _merged(args, "baseline", "none")
    k_max = _merged(args, "k-max")

    reports = []
    for gamma in gammas:
        config = ExperimentConfig(
            kind="spatial-sweep",
            gamma=gamma,
            seeds=seeds,
            n_list=ns,
            t_final=t_final,
            tau=tau,
            k_max=None if k_max is None else _as_int(k_max),
            baseline=baseline,
        )
        reports.append(spatial_sweep(config))
    _write_reports(reports, args)
    return 0


def _cmd_oracle_check(args) -> int:
    n_modes = _as_int(_merged(args, "n-modes", 8))
    trials = _as_int(_merged(args, "trials", 20))
    seed = _as_int(_merged(args, "seed", 1))
    result = oracle_check(n_modes, trials, seed)
    status = "PASS" if result.passed else "FAIL"
    print(
        f"{status}: oracle check N={result.n_modes} trials={result.trials} "
        f"max rel diff {result.max_rel_diff:.3e} (tolerance {result.tolerance:.0e})"
    )
    return 0 if result.passed else 1


def _cmd_dump_initial(args) -> int:
    gamma = _require(args, "gamma", "dump-initial", _as_float)
    seed = _as_int(_merged(args, "seed", 1))
    k_max = _as_int(_merged(args, "k-max", 2**10))
    field = random_low_reg(RegularityParams(gamma=gamma, seed=seed, k_max=k_max))
    payload = {
        "gamma": gamma,
        "seed": seed,
        "k_max": k_max,
        "modes": to_triples(field),
    }
    output = Path(_merged(args, "output"))
    output.write_text(json.dumps(payload) + "\n", encoding="utf-8")
    print(f"wrote {output}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "converge-time": _cmd_converge_time,
    "converge-space": _cmd_converge_space,
    "oracle-check": _cmd_oracle_check,
    "dump-initial": _cmd_dump_initial,
}


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config_path = getattr(args, "config", None)
    try:
        args._file_values = _load_config_file(config_path) if config_path else {}
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(parser.format_usage(), file=sys.stderr, end="")
        print(f"torusnls: error: {exc}", file=sys.stderr)
        return 2
    except TorusNlsError as exc:
        print(f"torusnls: configuration error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
