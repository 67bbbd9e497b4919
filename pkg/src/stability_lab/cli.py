"""Command-line front end.

Subcommands:

    verify-lemmas   exact anti-concentration suite (tail floor, moment
                    identities, second-moment inequality on randomized
                    distributions)
    certify         stability and boundedness certificates for one (n, gamma, l)
    trial           one seeded trial of the full pipeline, printed as JSON
    estimate        event-probability report for one n, emitted as CSV/JSON
    sweep           estimate across a list of n values, with an optional figure

Flags override config-file values (a flat JSON object mirroring the flags).
Exit codes: 0 success, 1 usage or configuration error, 2 a checked guarantee
failed; every failure embeds a minimal reproduction command.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .anticoncentration import (
    RADEMACHER_TAIL_BOUND,
    rademacher_moment_check,
    rademacher_tail_exact,
    random_distribution,
    verify_paley_zygmund,
)
from .certify import (
    CERTIFICATE_TOLERANCE,
    certify_boundedness,
    certify_stability_exhaustive,
    certify_stability_random,
)
from .construction import ConstructionParams
from .errors import GuardExceededError, InvariantViolationError
from .experiment import (
    E1_GIVEN_E2_FLOOR,
    E2_PROBABILITY_FLOOR,
    PROBABILITY_FLOOR,
    ExperimentReport,
    estimate_probabilities,
    run_trial,
    trial_rng,
)
from .figures import render_sweep_figure
from .reporting import render_csv, render_json, report_row, write_text_atomic

COMMANDS = ("verify-lemmas", "certify", "trial", "estimate", "sweep")
DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 42
LEMMA_TAIL_MAX_N = 10_000
LEMMA_MOMENT_NS = (1, 10, 100)
PZ_DISTRIBUTIONS = 1_000
PZ_THETAS = (0.0, 0.25, 0.5, 0.9, 1.0)
GAMMA_RULE = "L/sqrt(n)"

_CONFIG_KEYS = ("n", "gamma", "gamma_rule", "l", "trials", "seed", "output", "format", "plot")


class ConfigError(ValueError):
    """Invalid flags or config file; maps to exit code 1."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    n_values: tuple[int, ...]
    gamma: float | None
    gamma_rule: str | None
    l: float | None
    trials: int
    master_seed: int
    output_path: Path | None
    output_format: str
    plot_path: Path | None

    def resolve_gamma(self, n: int) -> float:
        if self.gamma is not None:
            return self.gamma
        return self.l / (n**0.5)

    def params_for(self, n: int) -> ConstructionParams:
        return ConstructionParams.from_targets(n=n, gamma=self.resolve_gamma(n), l=self.l)


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; usage errors are exit 1 here,
    # so surface them as ConfigError instead.
    def error(self, message: str):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="stability-lab",
        description="Monte Carlo lab for a worst-case generalization gap construction.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        cmd = sub.add_parser(name, add_help=True)
        cmd.add_argument("--config", type=Path, default=None, help="flat JSON config file")
        cmd.add_argument("--n", type=str, default=None, help="sample count, or comma list for sweep")
        cmd.add_argument("--gamma", type=float, default=None, help="stability budget")
        cmd.add_argument(
            "--gamma-rule",
            type=str,
            default=None,
            help=f'derive gamma per n; the supported rule is "{GAMMA_RULE}"',
        )
        cmd.add_argument("--l", type=float, default=None, help="loss bound budget")
        cmd.add_argument("--trials", type=int, default=None, help="Monte Carlo trial count")
        cmd.add_argument("--seed", type=int, default=None, help="master seed")
        cmd.add_argument("--output", type=Path, default=None, help="output file path")
        cmd.add_argument("--format", type=str, default=None, choices=("csv", "json"))
        cmd.add_argument("--plot", type=Path, default=None, help="figure path (sweep only)")
    return parser


def _load_config_file(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config: {path} must hold a flat JSON object")
    unknown = sorted(set(data) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"config: unknown keys {unknown}; expected {list(_CONFIG_KEYS)}")
    return data


def _parse_n_values(raw) -> tuple[int, ...]:
    if isinstance(raw, int):
        raw = [raw]
    elif isinstance(raw, str):
        raw = [part for part in raw.replace(" ", "").split(",") if part]
    elif not isinstance(raw, list):
        raise ConfigError(f"n: expected an integer, list, or comma string, got {raw!r}")
    values = []
    for item in raw:
        try:
            value = int(item)
        except (TypeError, ValueError):
            raise ConfigError(f"n: {item!r} is not an integer") from None
        if value < 1:
            raise ConfigError(f"n: must be >= 1, got {value}")
        values.append(value)
    if not values:
        raise ConfigError("n: at least one value is required")
    return tuple(values)


def parse_config(argv: list[str] | None = None) -> RunConfig:
    """Merge flags over the optional config file and validate the result."""
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise ConfigError(f"a command is required: one of {', '.join(COMMANDS)}")
    file_values = _load_config_file(args.config) if args.config else {}

    def pick(flag_value, key, default=None):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return file_values[key]
        return default

    command = args.command
    n_raw = pick(args.n, "n")
    gamma = pick(args.gamma, "gamma")
    gamma_rule = pick(args.gamma_rule, "gamma_rule")
    l_value = pick(args.l, "l")
    trials = pick(args.trials, "trials", DEFAULT_TRIALS)
    seed = pick(args.seed, "seed", DEFAULT_SEED)
    output = pick(args.output, "output")
    output_format = pick(args.format, "format", "csv")
    plot = pick(args.plot, "plot")

    try:
        trials = int(trials)
    except (TypeError, ValueError):
        raise ConfigError(f"trials: {trials!r} is not an integer") from None
    if trials < 1:
        raise ConfigError(f"trials: must be >= 1, got {trials}")
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ConfigError(f"seed: {seed!r} is not an integer") from None
    if seed < 0:
        raise ConfigError(f"seed: must be >= 0, got {seed}")
    if output_format not in ("csv", "json"):
        raise ConfigError(f"format: must be csv or json, got {output_format!r}")

    if gamma is not None and gamma_rule is not None:
        raise ConfigError("gamma: give either gamma or gamma-rule, not both")
    if gamma_rule is not None:
        normalized = str(gamma_rule).replace(" ", "").lower()
        if normalized != GAMMA_RULE.lower():
            raise ConfigError(f'gamma-rule: only "{GAMMA_RULE}" is supported, got {gamma_rule!r}')
        gamma_rule = GAMMA_RULE
    if gamma is not None:
        gamma = float(gamma)
    if l_value is not None:
        l_value = float(l_value)

    needs_problem = command in ("certify", "trial", "estimate", "sweep")
    n_values: tuple[int, ...] = ()
    if needs_problem:
        if n_raw is None:
            raise ConfigError("n: required for this command")
        n_values = _parse_n_values(n_raw)
        if command != "sweep" and len(n_values) != 1:
            raise ConfigError(f"n: {command} takes exactly one value, got {len(n_values)}")
        if l_value is None:
            raise ConfigError("l: required for this command")
        if l_value <= 0:
            raise ConfigError(f"l: must be > 0, got {l_value}")
        if gamma is None and gamma_rule is None:
            raise ConfigError("gamma: provide gamma or gamma-rule")
    if command in ("estimate", "sweep") and trials < 10**3:
        raise ConfigError(f"trials: estimate needs at least 1000 trials, got {trials}")
    if command == "verify-lemmas" and trials < 10**4:
        raise ConfigError(f"trials: verify-lemmas needs at least 10^4 trials, got {trials}")

    config = RunConfig(
        command=command,
        n_values=n_values,
        gamma=gamma,
        gamma_rule=gamma_rule,
        l=l_value,
        trials=trials,
        master_seed=seed,
        output_path=Path(output) if output is not None else None,
        output_format=output_format,
        plot_path=Path(plot) if plot is not None else None,
    )
    for n in config.n_values:
        resolved = config.resolve_gamma(n)
        if not 0.0 < resolved <= config.l:
            raise ConfigError(
                f"gamma: requires 0 < gamma <= l, got gamma={resolved} with "
                f"l={config.l} at n={n}"
            )
    return config


def _repro(config: RunConfig) -> str:
    parts = ["stability-lab", config.command]
    if config.n_values:
        parts.append(f"--n {','.join(str(n) for n in config.n_values)}")
    if config.gamma_rule is not None:
        parts.append(f'--gamma-rule "{config.gamma_rule}"')
    elif config.gamma is not None:
        parts.append(f"--gamma {config.gamma:g}")
    if config.l is not None:
        parts.append(f"--l {config.l:g}")
    parts.append(f"--trials {config.trials}")
    parts.append(f"--seed {config.master_seed}")
    return " ".join(parts)


def _fail(message: str, config: RunConfig) -> int:
    print(f"FAIL: {message}", file=sys.stderr)
    print(f"reproduce: {_repro(config)}", file=sys.stderr)
    return 2


def _emit_rows(rows: list[dict], config: RunConfig) -> None:
    text = render_csv(rows) if config.output_format == "csv" else render_json(rows)
    if config.output_path is not None:
        write_text_atomic(text, config.output_path)
        print(f"wrote {config.output_path}")
    else:
        sys.stdout.write(text)


def _floor_violations(report: ExperimentReport) -> list[str]:
    """One-sided 5-sigma checks of the universal probability floors."""
    problems = []
    gap = report.gap_event
    if gap.freq < PROBABILITY_FLOOR - 5.0 * gap.stderr:
        problems.append(
            f"gap-event frequency {gap.freq:.6f} below the 3/64 floor "
            f"({PROBABILITY_FLOOR:.6f}) beyond 5 standard errors"
        )
    e2 = report.e2
    if e2.freq < E2_PROBABILITY_FLOOR - 5.0 * e2.stderr:
        problems.append(
            f"E2 frequency {e2.freq:.6f} below the 3/32 floor "
            f"({E2_PROBABILITY_FLOOR:.6f}) beyond 5 standard errors"
        )
    cond = report.e1_given_e2
    if cond.total > 0 and cond.freq < E1_GIVEN_E2_FLOOR - 5.0 * cond.stderr:
        problems.append(
            f"E1-given-E2 frequency {cond.freq:.6f} below the 1/2 floor "
            "beyond 5 standard errors"
        )
    return problems


def cmd_verify_lemmas(config: RunConfig) -> int:
    failures = []
    worst = None
    for n in range(1, LEMMA_TAIL_MAX_N + 1):
        report = rademacher_tail_exact(n)
        if worst is None or report.exact_tail < worst.exact_tail:
            worst = report
        if not report.satisfied:
            failures.append(f"exact tail {report.exact_tail} below 3/32 at n={n}")
    print(
        f"tail floor: min exact tail over n in [1, {LEMMA_TAIL_MAX_N}] = "
        f"{worst.exact_tail:.9f} at n={worst.n} (floor {RADEMACHER_TAIL_BOUND}) -> "
        f"{'OK' if not failures else 'FAIL'}"
    )

    rng = np.random.default_rng(config.master_seed)
    for n in LEMMA_MOMENT_NS:
        check = rademacher_moment_check(n, config.trials, rng)
        ok = abs(check.z_square) <= 5.0 and abs(check.z_fourth) <= 5.0
        if not ok:
            failures.append(
                f"moment z-scores out of range at n={n}: "
                f"z2={check.z_square:.2f}, z4={check.z_fourth:.2f}"
            )
        print(
            f"moments n={n}: E[S^2]={check.mean_square:.4f} (target {check.target_square:g}, "
            f"z={check.z_square:+.2f}), E[S^4]={check.mean_fourth:.4f} "
            f"(target {check.target_fourth:g}, z={check.z_fourth:+.2f}) -> "
            f"{'OK' if ok else 'FAIL'}"
        )

    pz_rng = np.random.default_rng(config.master_seed + 1)
    pz_failures = 0
    for _ in range(PZ_DISTRIBUTIONS):
        dist = random_distribution(pz_rng)
        for theta in PZ_THETAS:
            check = verify_paley_zygmund(dist, theta)
            if not check.holds:
                pz_failures += 1
                failures.append(
                    f"second-moment tail bound failed: theta={theta}, "
                    f"tail={check.tail}, bound={check.bound}"
                )
    print(
        f"second-moment inequality: {PZ_DISTRIBUTIONS} distributions x "
        f"{len(PZ_THETAS)} thetas -> {'OK' if pz_failures == 0 else 'FAIL'}"
    )

    if failures:
        return _fail("; ".join(failures[:3]), config)
    return 0


def cmd_certify(config: RunConfig) -> int:
    n = config.n_values[0]
    params = config.params_for(n)
    gamma = params.gamma_target
    if n <= 2:
        certificate = certify_stability_exhaustive(params)
    else:
        certificate = certify_stability_random(
            params, config.trials, np.random.default_rng(config.master_seed)
        )
    print(
        f"stability[{certificate.mode}]: supremum {certificate.supremum_found:.12g} "
        f"(budget {certificate.budget_inspected}, gamma target {gamma:.12g})"
    )
    if certificate.witness is not None:
        w = certificate.witness
        print(
            f"  witness: S={list(zip(w.train.indices, w.train.signs))} "
            f"position={w.position} replacement=({w.replacement.x.index},"
            f"{w.replacement.x.sign}) point=({w.point.x.index},{w.point.x.sign})"
        )
    if certificate.supremum_found > gamma + CERTIFICATE_TOLERANCE:
        return _fail(
            f"stability supremum {certificate.supremum_found} exceeds gamma {gamma}",
            config,
        )
    if certificate.mode == "exhaustive" and abs(certificate.supremum_found - gamma) > CERTIFICATE_TOLERANCE:
        return _fail(
            f"exhaustive supremum {certificate.supremum_found} does not attain gamma {gamma}",
            config,
        )
    maximum = certify_boundedness(params)
    print(f"boundedness: loss maximum {maximum:.12g} <= l target {params.l_target:.12g}")
    return 0


def cmd_trial(config: RunConfig) -> int:
    n = config.n_values[0]
    params = config.params_for(n)
    result = run_trial(params, trial_rng(config.master_seed, 0), trial_seed=config.master_seed)
    payload = {
        "n": n,
        "gamma": params.gamma_target,
        "l": params.l_target,
        "seed": config.master_seed,
        "gap": result.gap,
        "e1": result.e1,
        "e2": result.e2,
        "gap_event": result.gap_event,
        "sigma_sum": result.sigma_sum,
    }
    print(json.dumps(payload))
    return 0


def cmd_estimate(config: RunConfig) -> int:
    n = config.n_values[0]
    report = estimate_probabilities(config.params_for(n), config.trials, config.master_seed)
    _emit_rows([report_row(report)], config)
    problems = _floor_violations(report)
    if problems:
        return _fail("; ".join(problems), config)
    return 0


def cmd_sweep(config: RunConfig) -> int:
    rows = []
    problems = []
    for n in config.n_values:
        report = estimate_probabilities(config.params_for(n), config.trials, config.master_seed)
        rows.append(report_row(report))
        problems.extend(f"n={n}: {p}" for p in _floor_violations(report))
    _emit_rows(rows, config)
    if config.plot_path is not None:
        render_sweep_figure(rows, config.plot_path)
        print(f"wrote {config.plot_path}")
    if problems:
        return _fail("; ".join(problems), config)
    return 0


_DISPATCH = {
    "verify-lemmas": cmd_verify_lemmas,
    "certify": cmd_certify,
    "trial": cmd_trial,
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
}


def run(config: RunConfig) -> int:
    """Execute a parsed configuration; returns the process exit code."""
    return _DISPATCH[config.command](config)


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return run(config)
    except GuardExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolationError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        print(f"reproduce: {_repro(config)}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
