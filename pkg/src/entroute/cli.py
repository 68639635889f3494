"""Command-line front end.

Configuration is a flat ``key = value`` file (``#`` starts a comment); any
command-line flag overrides the file. Subcommands: ``run``, ``sweep``,
``oracle``, ``rate``.

Exit codes: 0 success, 2 configuration error, 3 infeasible threshold,
4 oracle state budget exceeded, 5 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .chain import PathSpec, SpecificationError, format_prior_links, parse_prior_links
from .engine import SWAP_RULES, SimParams
from .fidelity import (
    DecayModel,
    DomainError,
    InfeasibleThresholdError,
    cutoff_steps,
    fidelity_at_age,
)
from .oracle import DEFAULT_BUDGET, BudgetExceededError, mc_vs_oracle
from .stats import SERIES, SUMMARY_QUANTILES
from .sweep import (
    PRESETS,
    REGIME_PE,
    REGIME_PS,
    REGIME_T,
    REGIME_TRIALS,
    ExperimentPreset,
    FairModeError,
    classify_panel,
    fair_params,
    panel_params,
    rate_comparison,
    run_experiment,
    run_panel,
)

log = logging.getLogger("entroute")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_BUDGET = 4
EXIT_RUNTIME = 5

CDF_HEADER = "step,cdf_path_a,cdf_path_b,cdf_first,cdf_all"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    pe: Optional[float] = None
    ps: Optional[float] = None
    tau_steps: float = 100.0
    fidelity_threshold: Optional[float] = None
    cutoff: Optional[int] = None
    trials: int = 10_000
    seed: int = 0
    max_steps: int = 10_000
    delta_t_us: float = 106.0
    hops_a: int = 2
    hops_b: int = 4
    prior_links_a: str = ""
    prior_links_b: str = "1-2,3-5"
    discard_on_swap_failure: bool = True
    apply_creation_noise: bool = True
    swap_rule: str = "oldest"
    output_dir: str = "."


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _field_types() -> dict:
    types = {}
    for f in fields(RunConfig):
        t = str(f.type)
        if "bool" in t:
            types[f.name] = _parse_bool
        elif "int" in t:
            types[f.name] = int
        elif "float" in t:
            types[f.name] = float
        else:
            types[f.name] = str
    return types


FIELD_TYPES = _field_types()


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Raw values from ``key = value`` lines.

    Dotted keys (``path_a.mean_steps``) are report values written next to a
    resolved configuration, so a summary file can be fed back in as a config.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if "." in key:
            continue
        if key not in FIELD_TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_config(raw: dict) -> RunConfig:
    kwargs = {}
    for key, value in raw.items():
        if value is None:
            continue
        if isinstance(value, str):
            if value.lower() in ("", "none") and key in ("pe", "ps", "fidelity_threshold", "cutoff"):
                continue
            try:
                value = FIELD_TYPES[key](value)
            except ValueError:
                raise ConfigError(f"invalid value for {key}: {value!r}") from None
        kwargs[key] = value
    config = RunConfig(**kwargs)
    if config.swap_rule not in SWAP_RULES:
        raise ConfigError(f"swap_rule must be one of {', '.join(SWAP_RULES)}")
    return config


def load_config(path: Optional[str], overrides: dict) -> RunConfig:
    raw = {}
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        raw.update(parse_config_text(text, path))
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(raw)


def path_specs(config: RunConfig) -> tuple[PathSpec, PathSpec]:
    return (
        PathSpec(config.hops_a, parse_prior_links(config.prior_links_a)),
        PathSpec(config.hops_b, parse_prior_links(config.prior_links_b)),
    )


def resolve_threshold(config: RunConfig, model: DecayModel) -> tuple[int, float]:
    """Cutoff and threshold, deriving whichever one is missing."""
    if config.cutoff is None and config.fidelity_threshold is None:
        raise ConfigError("one of cutoff or fidelity_threshold is required")
    if config.cutoff is not None and config.fidelity_threshold is not None:
        return config.cutoff, config.fidelity_threshold
    if config.cutoff is not None:
        if config.cutoff < 1:
            raise ConfigError("cutoff must be >= 1")
        return config.cutoff, fidelity_at_age(config.cutoff, model)
    T = cutoff_steps(config.fidelity_threshold, model)
    if T < 1:
        raise InfeasibleThresholdError(
            f"threshold {config.fidelity_threshold} leaves a cutoff below one step"
        )
    return T, config.fidelity_threshold


def sim_params(config: RunConfig, require_probabilities: bool = True) -> SimParams:
    if require_probabilities:
        for key in ("pe", "ps"):
            if getattr(config, key) is None:
                raise ConfigError(f"missing required key: {key}")
    model = DecayModel(config.tau_steps)
    T, f_th = resolve_threshold(config, model)
    return SimParams(
        p_e=config.pe,
        p_s=config.ps,
        T=T,
        f_th=f_th,
        model=model,
        max_steps=config.max_steps,
        delta_t_us=config.delta_t_us,
        discard_on_swap_failure=config.discard_on_swap_failure,
        apply_creation_noise=config.apply_creation_noise,
        swap_rule=config.swap_rule,
    )


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _f6(value) -> str:
    return "none" if value is None else f"{value:.6f}"


def config_lines(config: RunConfig, params: Optional[SimParams] = None) -> list[str]:
    """The fully resolved configuration, re-loadable as a config file."""
    if params is not None:
        config = replace(
            config, pe=params.p_e, ps=params.p_s, cutoff=params.T, fidelity_threshold=params.f_th
        )
    return [
        f"{f.name} = {_fmt(getattr(config, f.name))}"
        for f in fields(RunConfig)
        if f.name != "output_dir"
    ]


def write_text(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_panel(directory: Path, panel, config: RunConfig) -> None:
    rows = [CDF_HEADER]
    for row in panel.table.rows():
        rows.append(f"{row[0]}," + ",".join(f"{v:.6f}" for v in row[1:]))
    write_text(directory / "cdf.csv", rows)

    lines = ["# resolved configuration"]
    lines += config_lines(config, panel.params)
    lines.append("# derived")
    lines.append(f"derived.cutoff = {panel.params.T}")
    lines.append(f"derived.fidelity_threshold = {panel.params.f_th:.6f}")
    lines.append("# results")
    for name in SERIES:
        s = panel.summaries[name]
        conv = panel.convergence[name]
        lines.append(f"{name}.trials = {s.trials}")
        lines.append(f"{name}.mean_steps = {_f6(s.mean_steps)}")
        for q in SUMMARY_QUANTILES:
            lines.append(f"{name}.q{int(round(q * 100))} = {_fmt(s.quantiles[q])}")
        lines.append(f"{name}.censored_fraction = {s.censored_fraction:.6f}")
        lines.append(f"{name}.mean_e2e_fidelity = {_f6(s.mean_e2e_fidelity)}")
        lines.append(f"{name}.rate_hz = {_f6(s.rate_hz)}")
        lines.append(f"{name}.convergence_pass = {_fmt(conv.passed)}")
    write_text(directory / "summary.txt", lines)


def panel_dirname(pe: float, ps: float, T: int) -> str:
    return f"pe{pe:g}_ps{ps:g}_T{T}"


def cmd_run(config: RunConfig, workers: Optional[int] = None) -> Path:
    params = sim_params(config)
    spec_a, spec_b = path_specs(config)
    panel = run_panel(spec_a, spec_b, params, config.trials, config.seed, workers)
    out = Path(config.output_dir)
    write_panel(out, panel, config)
    return out


def _regime_lines(cells) -> list[str]:
    lines = ["pe,ps,T,verdict,stat"]
    for c in cells:
        lines.append(f"{c.pe:g},{c.ps:g},{c.T},{c.verdict.value},{c.stat:.6f}")
    return lines


def cmd_sweep(preset_name: str, config: RunConfig, workers: Optional[int] = None) -> Path:
    for key in ("pe", "ps", "cutoff", "fidelity_threshold"):
        if getattr(config, key) is not None:
            raise ConfigError(f"{key} is fixed by the preset and cannot be overridden")
    if preset_name != "regime_map" and preset_name not in PRESETS:
        raise ConfigError(
            f"unknown preset {preset_name!r}; choose from "
            + ", ".join([*PRESETS, "regime_map"])
        )
    spec_a, spec_b = path_specs(config)
    out = Path(config.output_dir)
    base_config = replace(config, pe=0.5, ps=0.5, cutoff=1)
    base = sim_params(base_config)

    if preset_name == "regime_map":
        cells = []
        for T in REGIME_T:
            for pe in REGIME_PE:
                for ps in REGIME_PS:
                    params = panel_params(base, pe, ps, T)
                    panel = run_panel(spec_a, spec_b, params, config.trials, config.seed, workers)
                    cells.append(classify_panel(panel))
        write_text(out / "regime_map.csv", _regime_lines(cells))
        return out

    preset = replace(
        PRESETS[preset_name], trials=config.trials, seed=config.seed, path_a=spec_a, path_b=spec_b
    )
    panels = run_experiment(preset, base, workers=workers)
    for panel in panels:
        write_panel(out / panel_dirname(panel.pe, panel.ps, panel.T), panel, config)
    write_text(out / "regime_map.csv", _regime_lines([classify_panel(p) for p in panels]))
    return out


def cmd_oracle(
    config: RunConfig,
    horizon: int,
    path: str = "a",
    workers: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> Path:
    params = sim_params(config)
    spec = path_specs(config)[0 if path == "a" else 1]
    report = mc_vs_oracle(spec, params, config.trials, horizon, config.seed, workers, budget)
    out = Path(config.output_dir)
    rows = ["step,exact,empirical,abs_diff"]
    for n in range(horizon):
        e, m = report.exact[n], report.empirical[n]
        rows.append(f"{n + 1},{e:.6f},{m:.6f},{abs(e - m):.6f}")
    write_text(out / "oracle.csv", rows)
    lines = ["# resolved configuration", *config_lines(config, params), "# results"]
    lines.append(f"oracle.path = {spec.label()}")
    lines.append(f"oracle.horizon = {horizon}")
    lines.append(f"oracle.sup_distance = {report.sup_distance:.6f}")
    lines.append(f"oracle.dkw_band = {report.band:.6f}")
    lines.append(f"oracle.verdict = {'pass' if report.passed else 'fail'}")
    write_text(out / "oracle.txt", lines)
    return out


def cmd_rate(
    config: RunConfig, fair_config: Optional[RunConfig] = None, workers: Optional[int] = None
) -> Path:
    realistic = sim_params(config)
    if fair_config is None:
        fair = fair_params(realistic)
    else:
        fair = sim_params(fair_config)
    spec_b = path_specs(config)[1]
    report = rate_comparison(realistic, fair, config.trials, config.seed, spec_b, workers)
    out = Path(config.output_dir)
    lines = ["# realistic configuration", *config_lines(config, realistic)]
    lines.append("# fair-comparison configuration")
    fair_cfg = replace(
        fair_config or config,
        discard_on_swap_failure=fair.discard_on_swap_failure,
        apply_creation_noise=fair.apply_creation_noise,
    )
    lines += [f"fair.{line}" for line in config_lines(fair_cfg, fair)]
    lines.append("# results")
    for mode, s in (("realistic", report.realistic), ("fair", report.fair)):
        lines.append(f"{mode}.mean_steps = {_f6(s.mean_steps)}")
        lines.append(f"{mode}.censored_fraction = {s.censored_fraction:.6f}")
        lines.append(f"{mode}.rate_hz = {_f6(s.rate_hz)}")
    lines.append(f"rate.ratio_fair_over_realistic = {_f6(report.ratio)}")
    write_text(out / "rate.txt", lines)
    return out


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value configuration file")
    for f in fields(RunConfig):
        parser.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None, metavar="VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entroute", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one (pe, ps, T) point on both paths")
    _add_config_flags(run)

    sweep = sub.add_parser("sweep", help="run a figure preset or the regime map")
    sweep.add_argument("preset")
    _add_config_flags(sweep)

    oracle = sub.add_parser("oracle", help="compare the engine with the exact distribution")
    oracle.add_argument("--horizon", type=int, default=50)
    oracle.add_argument("--path", choices=("a", "b"), default="a")
    oracle.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="state-count limit")
    _add_config_flags(oracle)

    rate = sub.add_parser("rate", help="realistic vs fair-comparison e2e rate")
    rate.add_argument("--fair-config", help="config file for the fair mode (derived if absent)")
    _add_config_flags(rate)
    return parser


def _overrides(args) -> dict:
    return {f.name: getattr(args, f.name) for f in fields(RunConfig)}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    try:
        overrides = _overrides(args)
        if args.command == "sweep" and args.preset == "regime_map" and overrides["trials"] is None:
            overrides["trials"] = str(REGIME_TRIALS)
        config = load_config(args.config, overrides)
        if args.command == "run":
            out = cmd_run(config)
        elif args.command == "sweep":
            out = cmd_sweep(args.preset, config)
        elif args.command == "oracle":
            out = cmd_oracle(config, args.horizon, args.path, budget=args.budget)
        else:
            fair_config = None
            if args.fair_config:
                fair_config = load_config(args.fair_config, {"output_dir": config.output_dir})
                if fair_config.pe is None:
                    fair_config = replace(fair_config, pe=config.pe)
            out = cmd_rate(config, fair_config)
    except InfeasibleThresholdError as exc:
        print(f"entroute: infeasible threshold: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BudgetExceededError as exc:
        print(f"entroute: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, SpecificationError, FairModeError, DomainError) as exc:
        print(f"entroute: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"entroute: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("wrote %s", out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
