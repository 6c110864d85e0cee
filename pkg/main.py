"""
Command-line interface: single runs, the manufactured-solution study and the full sweep
"""
import argparse
import itertools
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from config import RunConfig, parse_config
from errors import ConfigError, LimitFemError
from mms import convergence_study, format_convergence_table, write_convergence_csv
from models import Domain, ModelKind, NewtonConfig, TemperatureCase
from output_manager import OutputManager
from solver import ThermoelasticSolver

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

MMS_CSV = "mms_convergence.csv"
DEFAULT_CYCLES = 6

# flag dest -> RunConfig attribute
_FLAG_ATTRS = {
    "domain": "domain", "case": "case", "model": "model", "refinements": "refinements",
    "beta": "beta", "a": "a", "tol": "tol", "max_iter": "max_iter", "outdir": "outdir",
    "workers": "workers", "mechanics_solver": "mechanics_solver",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="limitfem",
                                     description="Strain-limiting thermoelasticity on the unit square")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key = value run configuration file")
        p.add_argument("--domain", choices=[d.value for d in Domain])
        p.add_argument("--case", type=int, choices=[c.value for c in TemperatureCase])
        p.add_argument("--model", choices=[m.value for m in ModelKind])
        p.add_argument("--refinements", type=int)
        p.add_argument("--beta", type=float)
        p.add_argument("--a", type=float)
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--outdir")
        p.add_argument("--workers", type=int)
        p.add_argument("--mechanics-solver", dest="mechanics_solver", choices=["direct", "cg"])

    common(sub.add_parser("run", help="solve one domain / case / model combination"))
    common(sub.add_parser("sweep", help="solve all 8 combinations and write a manifest"))
    mms = sub.add_parser("mms", help="h-convergence study against a manufactured solution")
    mms.add_argument("--cycles", type=int, default=DEFAULT_CYCLES)
    mms.add_argument("--outdir")
    mms.add_argument("--tol", type=float)
    mms.add_argument("--max-iter", dest="max_iter", type=int)
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for dest, attr in _FLAG_ATTRS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if attr == "domain":
            value = Domain(value)
        elif attr == "case":
            value = TemperatureCase(value)
        elif attr == "model":
            value = ModelKind(value)
        overrides[attr] = value
    return overrides


def failure_summary(config: RunConfig, error: LimitFemError) -> Dict[str, Any]:
    # Newton iteration of a strain-limit violation, 0 for failures outside Newton
    iteration = getattr(error, "iteration", None) or 0
    return {
        "domain": config.domain.value,
        "case": config.case.value,
        "model": config.model.value,
        "refinements": config.refinements,
        "converged": False,
        "iterations": iteration,
        "final_residual": None,
        "certificate": float("nan"),
        "error": type(error).__name__,
        "message": str(error),
    }


def run_single(config: RunConfig) -> Dict[str, Any]:
    """One experiment plus its exports, reported as a result dictionary"""
    label = f"{config.domain.value}_case{config.case.value}_{config.model.value}"
    logger.info("Starting %s (refinements=%d)", label, config.refinements)
    solver = ThermoelasticSolver(config.material(), config.newton(), config.mechanics_solver)
    try:
        result = solver.run_experiment(config.domain, config.case, config.model, config.refinements,
                                       total_stress=config.total_stress,
                                       profile_samples=config.profile_samples)
    except LimitFemError as e:
        logger.error("%s failed: %s", label, e)
        failed = {"success": False, "message": f"{label}: {str(e)}", "label": label}
        recorded = OutputManager(config.outdir).record_failure(label, failure_summary(config, e))
        if recorded["success"]:
            failed["entry"] = recorded["entry"]
            failed["directory"] = recorded["directory"]
        return failed

    exported = OutputManager(config.outdir).export_result(
        result, export_vtk=config.export_vtk, export_csv=config.export_csv,
        export_profile=config.export_profile)
    state = result.state
    logger.info("Finished %s in %.1fs", label, result.wall_time)
    if not exported["success"]:
        return {"success": False, "message": exported["message"], "label": label,
                "history": list(state.newton_history)}
    return {
        "success": state.converged,
        "message": f"{label}: {state.message}",
        "label": label,
        "history": list(state.newton_history),
        "entry": exported["entry"],
        "directory": exported["directory"],
    }


def sweep_configs(base: RunConfig) -> List[RunConfig]:
    return [replace(base, domain=domain, case=case, model=model)
            for domain, case, model in itertools.product(Domain, TemperatureCase, ModelKind)]


def run_sweep(base: RunConfig) -> List[Dict[str, Any]]:
    configs = sweep_configs(base)
    if base.workers == 1:
        results = [run_single(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=base.workers) as pool:
            results = list(pool.map(run_single, configs))
    entries = [r["entry"] for r in results if "entry" in r]
    OutputManager(base.outdir).write_manifest(entries)
    return results


def _print_failure(result: Dict[str, Any]) -> None:
    print(f"FAILED {result['message']}")
    history = result.get("history")
    if history:
        print("  residual history: " + ", ".join(f"{r:.3e}" for r in history))


def command_run(args: argparse.Namespace) -> int:
    config = parse_config(args.config, overrides_from_args(args))
    result = run_single(config)
    if not result["success"]:
        _print_failure(result)
        return EXIT_FAILURE
    print(f"{result['message']}; results in {result['directory']}")
    return EXIT_OK


def command_sweep(args: argparse.Namespace) -> int:
    config = parse_config(args.config, overrides_from_args(args))
    results = run_sweep(config)
    failed = [r for r in results if not r["success"]]
    for result in results:
        if result["success"]:
            print(f"ok     {result['message']}")
        else:
            _print_failure(result)
    print(f"{len(results) - len(failed)}/{len(results)} runs succeeded; manifest in {config.outdir}")
    return EXIT_FAILURE if failed else EXIT_OK


def command_mms(args: argparse.Namespace) -> int:
    overrides = {"outdir": args.outdir, "tol": args.tol, "max_iter": args.max_iter}
    config = parse_config(None, overrides)
    try:
        table = convergence_study(args.cycles, newton=NewtonConfig(config.tol, config.max_iter))
    except (LimitFemError, ValueError) as e:
        print(f"FAILED {str(e)}")
        return EXIT_FAILURE
    print(format_convergence_table(table))
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = write_convergence_csv(table, outdir / MMS_CSV)
    print(f"table written to {path}")
    return EXIT_OK


COMMANDS = {"run": command_run, "sweep": command_sweep, "mms": command_mms}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(levelname)s: %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"Configuration error: {str(e)}")
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {str(e)}")
        return EXIT_FAILURE
    except KeyboardInterrupt:
        print("\nInterrupted")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
