"""
mixedbm command line.

    mixedbm oracle-eigs --config run.toml
    mixedbm ssm-eigs --config run.toml --shape star --n 256 --tiles 8,4
    mixedbm scatter --config run.toml --omega 2
    mixedbm selftest

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from mixedbm.core import circle_oracle, export, nep_ssm, systems
from mixedbm.core.errors import (
    ContourHitError,
    DomainError,
    MixedBMError,
    NearFieldError,
    NumericalFailure,
    UnsupportedShapeError,
)
from mixedbm.core.geometry import Circle, CurveDiscretization, sample
from mixedbm.core.layerpot import NEAR_FIELD_FACTOR
from mixedbm.core.models import (
    Classification,
    EigenResult,
    FieldRegion,
    Formulation,
    TransmissionConfig,
)
from mixedbm.core.selftest import run_selftest
from mixedbm.parser.run_config import RunConfig, load_config
from mixedbm.parser.utils import parse_region, parse_tiles

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

CONFIG_HELP = """
configuration file (TOML), every key optional:
  [shape]           kind = "circle" | "star", radius, amplitude, lobes
  [materials]       eps0, eps1, mu0, mu1
  [discretization]  n (even, >= 8)
  [solver]          formulation = "bm" | "mixed" | "both"
  [region]          re_min, re_max, im_min, im_max
  [tiles]           nx, ny
  [ssm]             moments, block_size, nodes_per_side, svd_rel_tol,
                    residual_tol, merge_tol, seed, workers
  [oracle]          n_max, grid_nx, grid_ny
  [scatter]         omega, angle, x_min, x_max, y_min, y_max, nx, ny
  [output]          directory, timestamp, gnuplot
see src/mixedbm/examples/default.toml for the defaults
"""

ORACLE_COLUMNS = ["n", "re", "im", "residual", "classification", "converged"]
SSM_COLUMNS = [
    "formulation",
    "tile",
    "re",
    "im",
    "residual",
    "multiplicity",
    "classification",
    "n",
]


def _overrides(args: argparse.Namespace) -> dict[str, dict[str, Any]]:
    overrides: dict[str, dict[str, Any]] = {}

    def put(section: str, key: str, value: Any) -> None:
        overrides.setdefault(section, {})[key] = value

    if getattr(args, "shape", None):
        put("shape", "kind", args.shape)
    if getattr(args, "n", None) is not None:
        put("discretization", "n", args.n)
    if getattr(args, "formulation", None):
        put("solver", "formulation", args.formulation)
    if getattr(args, "region", None):
        overrides.setdefault("region", {}).update(parse_region(args.region))
    if getattr(args, "tiles", None):
        overrides.setdefault("tiles", {}).update(parse_tiles(args.tiles))
    if getattr(args, "seed", None) is not None:
        put("ssm", "seed", args.seed)
    if getattr(args, "workers", None) is not None:
        put("ssm", "workers", args.workers)
    if getattr(args, "out", None):
        put("output", "directory", args.out)
    if getattr(args, "no_timestamp", False):
        put("output", "timestamp", False)
    if getattr(args, "gnuplot", False):
        put("output", "gnuplot", True)
    if getattr(args, "omega", None) is not None:
        put("scatter", "omega", args.omega)
    if getattr(args, "angle", None) is not None:
        put("scatter", "angle", args.angle)
    return overrides


def _eigen_rows(formulation: str, results: list[EigenResult]) -> list[list[Any]]:
    return [
        [
            formulation,
            r.tile,
            r.re,
            r.im,
            r.residual,
            r.multiplicity,
            r.classification.value,
            r.n,
        ]
        for r in results
    ]


def classify_on_circle(
    results: list[EigenResult], config: RunConfig
) -> list[EigenResult]:
    """Label SSM eigenvalues on a circle by the mode factor that vanishes there"""
    transmission = config.transmission()
    classified = []
    for result in results:
        n, label, _ = circle_oracle.classify(
            result.value, transmission, config.oracle.n_max
        )
        classified.append(result.model_copy(update={"n": n, "classification": label}))
    return classified


def classify_by_perturbation(
    results: list[EigenResult],
    formulation: Formulation,
    transmission: TransmissionConfig,
    disc: CurveDiscretization,
) -> list[EigenResult]:
    """Label eigenvalues on shapes without a series solution"""
    classified = []
    for result in results:
        label, _, _ = systems.classify_by_perturbation(
            formulation, transmission, disc, result.value
        )
        classified.append(result.model_copy(update={"classification": label}))
    return classified


def cmd_oracle_eigs(config: RunConfig) -> dict[str, Any]:
    transmission = config.transmission()
    if not isinstance(transmission.curve, Circle):
        raise UnsupportedShapeError("oracle-eigs needs shape.kind = 'circle'")
    region = config.region.to_rectangle()
    results = circle_oracle.find_eigen(
        region,
        transmission,
        n_max=config.oracle.n_max,
        grid=(config.oracle.grid_nx, config.oracle.grid_ny),
    )
    out = config.output.directory
    path = export.write_csv(
        out / "eigs_oracle.csv",
        "oracle-eigs",
        ORACLE_COLUMNS,
        [
            [r.n, r.re, r.im, r.residual, r.classification.value, r.converged]
            for r in results
        ],
        timestamp=config.output.timestamp,
    )
    if config.output.gnuplot:
        export.write_gnuplot(
            out / "eigs.gp",
            [
                (
                    path.name,
                    "every ::1 using (strcol(5) eq 'True' ? $2 : NaN):3 "
                    "with points pt 7 title 'True'",
                ),
                (
                    path.name,
                    "every ::1 using (strcol(5) eq 'Fictitious' ? $2 : NaN):3 "
                    "with points pt 6 title 'Fictitious'",
                ),
            ],
        )
    summary = {
        "command": "oracle-eigs",
        "config": config.model_dump(mode="json"),
        "count": len(results),
        "true": sum(r.classification is Classification.TRUE for r in results),
        "fictitious": sum(r.classification is Classification.FICTITIOUS for r in results),
        "unconverged": sum(not r.converged for r in results),
        "max_residual": max((r.residual for r in results), default=0.0),
        "files": [path.name],
    }
    export.write_json(out / "summary.json", summary, timestamp=config.output.timestamp)
    return summary


def cmd_ssm_eigs(config: RunConfig) -> dict[str, Any]:
    transmission = config.transmission()
    disc = sample(transmission.curve, config.discretization.n)
    region = config.region.to_rectangle()
    params = config.ssm.params()
    out = config.output.directory
    found: dict[Formulation, list[EigenResult]] = {}
    files = []
    for formulation in config.solver.formulations():
        family = systems.operator_family(formulation, transmission, disc)
        try:
            results = nep_ssm.solve_region(
                family,
                region,
                (config.tiles.nx, config.tiles.ny),
                params,
                nodes_per_side=config.ssm.nodes_per_side,
            )
        except ContourHitError as exc:
            tile = region.tiles(config.tiles.nx, config.tiles.ny)[exc.tile or 0]
            raise ContourHitError(
                f"{formulation.value}: {exc} (tile {exc.tile}: {tile.model_dump()})",
                exc.node,
                exc.tile,
            ) from exc
        if isinstance(transmission.curve, Circle):
            results = classify_on_circle(results, config)
        else:
            results = classify_by_perturbation(results, formulation, transmission, disc)
        found[formulation] = results
        path = export.write_csv(
            out / f"eigs_{formulation.value}.csv",
            "ssm-eigs",
            SSM_COLUMNS,
            _eigen_rows(formulation.value, results),
            timestamp=config.output.timestamp,
        )
        files.append(path.name)

    summary: dict[str, Any] = {
        "command": "ssm-eigs",
        "config": config.model_dump(mode="json"),
        "counts": {f.value: len(r) for f, r in found.items()},
        "max_residual": {
            f.value: max((e.residual for e in r), default=0.0) for f, r in found.items()
        },
    }
    if len(found) == 2:
        bm, mixed = found[Formulation.BM], found[Formulation.MIXED]
        report = nep_ssm.pair_eigenvalues([e.value for e in bm], [e.value for e in mixed])
        rows: list[list[Any]] = []
        for side, source, target, distances in (
            ("bm", bm, mixed, report.forward),
            ("mixed", mixed, bm, report.backward),
        ):
            for index, (result, distance) in enumerate(zip(source, distances)):
                nearest = min(target, key=lambda e: abs(e.value - result.value))
                rows.append(
                    [side, index, result.re, result.im, nearest.re, nearest.im, distance]
                )
        path = export.write_csv(
            out / "pairing.csv",
            "pairing",
            ["side", "index", "re", "im", "nearest_re", "nearest_im", "distance"],
            rows,
            timestamp=config.output.timestamp,
        )
        files.append(path.name)
        summary["pairing"] = {
            "max_distance": report.max_distance,
            "one_to_one": report.one_to_one,
        }
    if config.output.gnuplot:
        export.write_gnuplot(
            out / "eigs.gp",
            [
                (name, f"every ::1 using 3:4 with points title '{name}'")
                for name in files
                if name.startswith("eigs_")
            ],
        )
    summary["files"] = files
    export.write_json(out / "summary.json", summary, timestamp=config.output.timestamp)
    return summary


def _grid(config: RunConfig) -> np.ndarray:
    s = config.scatter
    x = np.linspace(s.x_min, s.x_max, s.nx)
    y = np.linspace(s.y_min, s.y_max, s.ny)
    xx, yy = np.meshgrid(x, y)
    return np.stack([xx.ravel(), yy.ravel()], axis=-1)


def cmd_scatter(config: RunConfig) -> dict[str, Any]:
    transmission = config.transmission()
    disc = sample(transmission.curve, config.discretization.n)
    omega = config.scatter.omega
    angle = config.scatter.angle
    direction = (float(np.cos(angle)), float(np.sin(angle)))
    k0, _ = transmission.wavenumbers(omega)
    incident = systems.incident_plane_wave(k0, direction)
    out = config.output.directory

    targets = _grid(config)
    limit = NEAR_FIELD_FACTOR * disc.mesh_spacing()
    rejected = np.flatnonzero(disc.distance_to(targets) <= limit)
    if rejected.size:
        logger.warning(
            "rejected %d target(s) in the near-boundary band: %s",
            rejected.size,
            rejected.tolist(),
        )
    keep = np.setdiff1d(np.arange(len(targets)), rejected)
    points = targets[keep]
    inside = transmission.curve.contains(points)

    mie = None
    if isinstance(transmission.curve, Circle):
        mie = circle_oracle.mie_transmission(transmission, omega, direction)

    columns = ["index", "x", "y", "region"]
    field_columns: list[np.ndarray] = []
    trace_rows: list[list[Any]] = []
    summary: dict[str, Any] = {
        "command": "scatter",
        "config": config.model_dump(mode="json"),
        "rejected_targets": rejected.tolist(),
        "solves": {},
    }
    fields: dict[Formulation, np.ndarray] = {}
    for formulation in config.solver.formulations():
        solution = systems.solve_scattering(
            transmission, disc, omega, incident, formulation
        )
        total = np.empty(len(points), dtype=np.complex128)
        if np.any(~inside):
            total[~inside] = systems.eval_field(
                transmission, disc, solution, points[~inside], FieldRegion.EXTERIOR
            )
        if np.any(inside):
            total[inside] = systems.eval_field(
                transmission, disc, solution, points[inside], FieldRegion.INTERIOR
            )
        fields[formulation] = total
        scattered = total - incident.value(points)
        name = formulation.value
        columns += [f"re_u_{name}", f"im_u_{name}", f"re_us_{name}", f"im_us_{name}"]
        field_columns += [total.real, total.imag, scattered.real, scattered.imag]
        info: dict[str, Any] = {
            "residual": solution.residual,
            "condition_estimate": solution.condition_estimate,
        }
        mie_u = mie_q = None
        if mie is not None:
            mie_u, mie_q = mie.traces(disc)
            info["max_trace_error_u"] = float(np.max(np.abs(solution.u - mie_u)))
            info["max_trace_error_q"] = float(np.max(np.abs(solution.q - mie_q)))
        summary["solves"][name] = info
        for j in range(disc.n_nodes):
            row = [
                name,
                j,
                disc.t[j],
                disc.points[j, 0],
                disc.points[j, 1],
                solution.u[j].real,
                solution.u[j].imag,
                solution.q[j].real,
                solution.q[j].imag,
            ]
            if mie_u is not None and mie_q is not None:
                row += [mie_u[j].real, mie_u[j].imag, mie_q[j].real, mie_q[j].imag]
            trace_rows.append(row)

    if mie is not None:
        exact = mie.field(points)
        columns += ["re_u_mie", "im_u_mie"]
        field_columns += [exact.real, exact.imag]
        summary["max_field_error"] = {
            f.value: float(np.max(np.abs(values - exact))) if len(points) else 0.0
            for f, values in fields.items()
        }
    if len(fields) == 2 and len(points):
        summary["max_field_difference"] = float(
            np.max(np.abs(fields[Formulation.BM] - fields[Formulation.MIXED]))
        )

    region_names = np.where(
        inside, FieldRegion.INTERIOR.value, FieldRegion.EXTERIOR.value
    )
    field_rows = [
        [int(keep[i]), points[i, 0], points[i, 1], region_names[i]]
        + [float(column[i]) for column in field_columns]
        for i in range(len(points))
    ]
    trace_columns = ["formulation", "node", "t", "x", "y", "re_u", "im_u", "re_q", "im_q"]
    if mie is not None:
        trace_columns += ["re_u_mie", "im_u_mie", "re_q_mie", "im_q_mie"]
    timestamp = config.output.timestamp
    export.write_csv(out / "field.csv", "field", columns, field_rows, timestamp)
    export.write_csv(out / "traces.csv", "traces", trace_columns, trace_rows, timestamp)
    summary["files"] = ["field.csv", "traces.csv"]
    export.write_json(out / "summary.json", summary, timestamp=timestamp)
    return summary


def cmd_selftest() -> bool:
    report = run_selftest()
    for line in report.lines():
        print(line)
    print("selftest " + ("passed" if report.passed else "FAILED"))
    return report.passed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixedbm",
        description="Burton-Miller and mixed Burton-Miller BIEs for 2D Helmholtz "
        "transmission problems.",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", type=Path, help="TOML configuration file")
        sub.add_argument("--shape", choices=["circle", "star"])
        sub.add_argument("--n", type=int, help="number of boundary nodes (even)")
        sub.add_argument("--formulation", choices=["bm", "mixed", "both"])
        sub.add_argument("--region", help="re_min,re_max,im_min,im_max")
        sub.add_argument("--tiles", help="nx,ny")
        sub.add_argument("--seed", type=int, help="SSM probe seed")
        sub.add_argument("--workers", type=int, help="threads over SSM tiles")
        sub.add_argument("--out", help="output directory")
        sub.add_argument(
            "--no-timestamp",
            action="store_true",
            help="omit the generated-at line so reruns are byte-identical",
        )
        sub.add_argument("--gnuplot", action="store_true", help="also write eigs.gp")

    for name, text in (
        ("oracle-eigs", "eigenfrequencies of the circle from the mode determinants"),
        ("ssm-eigs", "eigenfrequencies of the discretized systems by contour integrals"),
        ("scatter", "plane-wave forward solve, boundary traces and field on a grid"),
    ):
        sub = commands.add_parser(
            name,
            help=text,
            epilog=CONFIG_HELP,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        common(sub)
        if name == "scatter":
            sub.add_argument("--omega", type=float, help="real angular frequency")
            sub.add_argument("--angle", type=float, help="incidence angle (radians)")
    commands.add_parser("selftest", help="fast invariant suite")
    return parser


def _setup_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def run(args: argparse.Namespace) -> int:
    if args.command == "selftest":
        return EXIT_OK if cmd_selftest() else EXIT_VALIDATION
    config = load_config(args.config, _overrides(args))
    match args.command:
        case "oracle-eigs":
            summary = cmd_oracle_eigs(config)
        case "ssm-eigs":
            summary = cmd_ssm_eigs(config)
        case "scatter":
            summary = cmd_scatter(config)
        case _:
            raise DomainError(f"unknown command {args.command}")
    logger.info("%s finished: %s", args.command, summary.get("files"))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return run(args)
    except NearFieldError as exc:
        print(f"error: {exc} (targets {exc.indices})", file=sys.stderr)
        return EXIT_VALIDATION
    except (MixedBMError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, NumericalFailure):
            return EXIT_NUMERICAL
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
