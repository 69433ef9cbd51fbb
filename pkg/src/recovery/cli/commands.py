import argparse
import json
import logging
from pathlib import Path
from typing import Any, List, Optional, Tuple

from pydantic import ValidationError

from recovery.boundary.feller import boundary_report
from recovery.boundary.models import Classification
from recovery.cli.models import Config
from recovery.cli.output import dumps, write_csv
from recovery.errors import ConfigError, RecoveryError
from recovery.martcrit.criteria import martingale_check
from recovery.martcrit.models import MartingaleStatus
from recovery.odesolve.shooting import critical_lambda, extremal_solution, slope_bounds
from recovery.recover.admissible import DEFAULT_SAMPLES, admissible_set
from recovery.recover.agent import recover_agent
from recovery.simulate.euler import simulate
from recovery.simulate.models import Measure
from recovery.usualset.models import InclusionFlag, UsualStatus
from recovery.usualset.usual import usual_check

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_INDETERMINATE = 3

# (payload printed as JSON, True when an indeterminate outcome blocks the result)
Outcome = Tuple[Any, bool]


def load_config(path: str) -> Config:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e.msg} at line {e.lineno}")
    return Config.model_validate(data)


def _require_lambda(args) -> float:
    if args.lam is None:
        err = ConfigError(f"{args.command} needs --lambda")
        err.path = "--lambda"
        raise err
    return args.lam


def cmd_classify(config: Config, args) -> Outcome:
    report = boundary_report(config.model.build(), config.numerics)
    payload = {
        "left": report.left,
        "right": report.right,
        "non_explosive": report.non_explosive,
        "diagnostics": report.diagnostics,
    }
    blocked = Classification.INDETERMINATE in (report.left, report.right)
    return payload, blocked


def cmd_critical(config: Config, args) -> Outcome:
    return critical_lambda(config.model.build(), config.numerics), False


def cmd_slice(config: Config, args) -> Outcome:
    lam = _require_lambda(args)
    candidate = slope_bounds(config.model.build(), lam, config.numerics)
    payload = candidate.model_dump()
    payload["width"] = candidate.width
    return payload, candidate.indeterminate


def cmd_admissible(config: Config, args) -> Outcome:
    if args.grid < 1:
        err = ConfigError(f"--grid must be at least 1, got {args.grid}")
        err.path = "--grid"
        raise err
    result = admissible_set(config.model.build(), args.grid, config.numerics)
    if args.out:
        write_csv(
            Path(args.out),
            ("lambda", "m_slope", "martingale", "usual"),
            ((s.lam, s.m_slope, s.martingale, s.usual) for s in result.samples),
        )
        logger.info(f"Wrote {len(result.samples)} admissible samples to {args.out}")
    flags = (result.lo_included, result.hi_included)
    blocked = InclusionFlag.INDETERMINATE in flags or any(
        s.martingale == MartingaleStatus.INDETERMINATE or s.usual == UsualStatus.INDETERMINATE
        for s in result.samples
    )
    return result, blocked


def cmd_recover(config: Config, args) -> Outcome:
    lam = _require_lambda(args)
    model = config.model.build()
    agent = recover_agent(model, lam, config.numerics, force=args.force)
    if args.out:
        write_csv(
            Path(args.out),
            ("x", "phi", "marginal_utility", "utility", "objective_drift"),
            zip(agent.x, agent.phi, agent.marginal_utility, agent.utility, agent.drift),
        )
        logger.info(f"Wrote agent grid of {agent.x.size} points to {args.out}")
    payload = {
        "beta": agent.beta,
        "lambda": lam,
        "m_slope": agent.slope,
        "xi": model.xi,
        "normalizations": {"phi_at_xi": 1.0, "marginal_utility_at_xi": 1.0, "utility_at_xi": 0.0},
        "objective_drift_at_xi": float(agent.objective_drift(model.xi)),
        "grid": {"x_min": agent.x[0], "x_max": agent.x[-1], "points": int(agent.x.size)},
        "clipped": agent.clipped,
        "forced": args.force,
    }
    return payload, False


def cmd_simulate(config: Config, args) -> Outcome:
    spec = config.simulation
    measure = Measure(args.measure)
    model = config.model.build()
    agent = None
    if measure == Measure.P or args.lam is not None:
        agent = recover_agent(model, _require_lambda(args), config.numerics, force=args.force)
    seed = spec.seed if args.seed is None else args.seed
    result = simulate(
        model,
        measure,
        horizon=spec.horizon,
        n_paths=spec.n_paths,
        n_steps=spec.n_steps,
        seed=seed,
        agent=agent,
        thresholds=spec.thresholds,
        antithetic=spec.antithetic,
        numerics=config.numerics,
    )
    return result, False


def cmd_check(config: Config, args) -> Outcome:
    lam = _require_lambda(args)
    model = config.model.build()
    numerics = config.numerics
    solution = extremal_solution(model, lam, numerics)
    martingale = martingale_check(model, solution, numerics)
    report = boundary_report(model, numerics)
    lambda_bar = critical_lambda(model, numerics).lambda_bar
    usual = usual_check(model, solution, report, numerics, lambda_bar)
    payload = {
        "lambda": lam,
        "lambda_bar": lambda_bar,
        "m_slope": solution.slope,
        "martingale": martingale,
        "usual": usual,
    }
    blocked = (
        martingale.status == MartingaleStatus.INDETERMINATE
        or usual.status == UsualStatus.INDETERMINATE
    )
    return payload, blocked


COMMANDS = {
    "classify": cmd_classify,
    "critical": cmd_critical,
    "slice": cmd_slice,
    "admissible": cmd_admissible,
    "recover": cmd_recover,
    "simulate": cmd_simulate,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recoverlens",
        description="Recover the representative agent of a one-dimensional diffusion market.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="Path to the JSON config file.")
        p.add_argument("--lambda", dest="lam", type=float, default=None, help="Eigenvalue lambda.")
        p.add_argument(
            "--grid", type=int, default=DEFAULT_SAMPLES, help="Number of lambda samples."
        )
        p.add_argument("--measure", choices=[m.value for m in Measure], default=Measure.Q.value)
        p.add_argument("--out", default=None, help="CSV output path.")
        p.add_argument("--seed", type=int, default=None, help="Overrides simulation.seed.")
        p.add_argument(
            "--force", action="store_true", help="Recover without the admissibility check."
        )
    return parser


def _error_payload(name: str, detail: str, path: Optional[str] = None, **extra) -> dict:
    payload = {"error": name, "detail": detail}
    if path:
        payload["path"] = path
    payload.update(extra)
    return payload


def _validation_payload(e: ValidationError) -> dict:
    errors = e.errors()
    locations = [".".join(str(p) for p in err["loc"]) for err in errors]
    detail = "; ".join(f"{loc}: {err['msg']}" for loc, err in zip(locations, errors))
    return _error_payload("ValidationError", detail, locations[0] if locations else None)


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        payload, blocked = COMMANDS[args.command](config, args)
    except ValidationError as e:
        logger.error(f"Invalid config {args.config}: {e.error_count()} error(s)")
        print(dumps(_validation_payload(e)))
        return 2
    except RecoveryError as e:
        logger.error(f"{args.command} failed: {e.detail}")
        extra = {}
        offset = getattr(e, "offset", None)
        if offset is not None:
            extra["offset"] = offset
        print(dumps(_error_payload(type(e).__name__, e.detail, e.path, **extra)))
        return e.exit_code
    print(dumps(payload))
    if blocked:
        logger.warning(f"{args.command} finished with an indeterminate outcome")
        return EXIT_INDETERMINATE
    return EXIT_OK
