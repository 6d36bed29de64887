import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from src.bench.convergence import convergence_study, error_spread, robustness_sweep
from src.bench.output import write_csv
from src.bench.runner import run_case
from src.config.run_config import load_run_config
from src.utils.common import setup_logging
from src.utils.errors import CutFlowError

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()


def _mesh_list(text: str) -> List[int]:
    try:
        meshes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Mesh list must be comma-separated integers, got '{text}'")
    if not meshes or min(meshes) < 1:
        raise argparse.ArgumentTypeError(f"Mesh sizes must be positive, got '{text}'")
    return meshes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cutflow",
        description="Space-time cut finite elements for two-phase flow with insoluble surfactant",
    )
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser, default_case: Optional[str] = None) -> None:
        sub.add_argument("--case", required=default_case is None, default=default_case)
        sub.add_argument("--config", default=None, help="TOML file with [cases.<name>] tables")
        sub.add_argument("--nx", type=int)
        sub.add_argument("--ny", type=int)
        sub.add_argument("--dt", type=float, help="Absolute time step")
        sub.add_argument("--dt-factor", type=float, help="Time step as a multiple of h")
        sub.add_argument("--t-final", type=float)
        sub.add_argument("--beta", type=float, help="Equation-of-state beta")
        sub.add_argument("--formulation", choices=["conservative", "nonconservative"])
        sub.add_argument("--refine-levels", type=int)
        sub.add_argument("--geometry-updates", type=int, help="Re-advections of each slab with its own velocity")
        sub.add_argument("--vtk-every", type=int)
        sub.add_argument("--out", help="Output directory")

    add_common(commands.add_parser("run", help="Run one experiment"))
    convergence = commands.add_parser("convergence", help="Mesh-convergence table of a surfactant case")
    add_common(convergence, default_case="example1")
    convergence.add_argument("--meshes", type=_mesh_list, default=[10, 20, 40, 80])
    sweep = commands.add_parser("sweep", help="Solvability over random interface offsets")
    add_common(sweep, default_case="static_drop")
    sweep.add_argument("--count", type=int, default=20)
    sweep.add_argument("--seed", type=int, default=0)
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {
        "nx": args.nx, "ny": args.ny, "t_final": args.t_final,
        "refine_levels": args.refine_levels, "geometry_updates": args.geometry_updates,
        "vtk_every": args.vtk_every, "out": args.out,
    }
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.dt_factor is not None:
        overrides["dt_factor"] = args.dt_factor
    if args.beta is not None:
        overrides["eos"] = {"beta": args.beta}
    if args.formulation is not None:
        overrides["surfactant"] = {"formulation": args.formulation}
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        setup_logging(args.log_level)
        config = load_run_config(args.case, args.config, overrides_from_args(args))
        if args.command == "run":
            result = run_case(config)
            for path in result.files:
                logger.info("Wrote %s", path)
        elif args.command == "convergence":
            table = convergence_study(config, args.meshes)
            logger.info("Convergence table:\n%s", table.to_string(index=False))
        else:
            table = robustness_sweep(config, args.count, args.seed)
            path = write_csv(table, config.output_dir / "sweep.csv")
            logger.info("Solved %d of %d offsets; wrote %s", int(table["solved"].sum()), len(table), path)
            if "l2_error" in table:
                logger.info("Final L2 error spread (max/min): %.3f", error_spread(table))
    except CutFlowError as exc:
        logger.error("%s", exc)
        return 2
    except (ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
