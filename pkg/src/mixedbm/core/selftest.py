# mixedbm.core.selftest

import logging
import time
from typing import Callable

import numpy as np
from pydantic import BaseModel, computed_field

from mixedbm.core import specfun
from mixedbm.core.circle_oracle import (
    det_mixed,
    factorized_det_mixed,
    mode_matrix_mixed,
    operator_symbols,
)
from mixedbm.core.geometry import circle, sample
from mixedbm.core.layerpot import assemble_many
from mixedbm.core.models import OperatorKind, TransmissionConfig
from mixedbm.core.nep_ssm import ContourSpec, SsmParams, compute_moments, extract_eigen
from mixedbm.core.specfun import CylinderKind

logger = logging.getLogger(__name__)

SEED = 20240601


class SuiteResult(BaseModel):
    name: str
    max_error: float
    tolerance: float
    seconds: float

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_error)) and self.max_error <= self.tolerance


class SelftestReport(BaseModel):
    suites: list[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)

    def lines(self) -> list[str]:
        width = max(len(suite.name) for suite in self.suites)
        return [
            f"{'PASS' if suite.passed else 'FAIL'}  {suite.name:<{width}}  "
            f"max error {suite.max_error:.3e}  (tolerance {suite.tolerance:.0e}, "
            f"{suite.seconds:.2f} s)"
            for suite in self.suites
        ]


def wronskian_error() -> float:
    rng = np.random.default_rng(SEED)
    z = rng.uniform(0.2, 40.0, 200) + 1j * rng.uniform(-2.0, 2.0, 200)
    n = rng.integers(-20, 21, 200)
    w = np.asarray(specfun.wronskian(CylinderKind.J, CylinderKind.Y, n, z))
    exact = 2.0 / (np.pi * z)
    return float(np.max(np.abs(w - exact) / np.abs(exact)))


def recurrence_error() -> float:
    rng = np.random.default_rng(SEED + 1)
    z = rng.uniform(0.5, 30.0, 100) + 1j * rng.uniform(-2.0, 2.0, 100)
    n = rng.integers(-15, 16, 100)
    worst = 0.0
    for kind in CylinderKind:
        lower = np.asarray(specfun.evaluate(kind, n - 1, z))
        middle = np.asarray(specfun.evaluate(kind, n, z))
        upper = np.asarray(specfun.evaluate(kind, n + 1, z))
        terms = np.abs(lower) + np.abs(upper) + np.abs(2 * n / z * middle)
        worst = max(
            worst, float(np.max(np.abs(lower + upper - 2 * n / z * middle) / terms))
        )
        parity = np.asarray(specfun.evaluate(kind, -n, z)) - (-1.0) ** n * middle
        worst = max(worst, float(np.max(np.abs(parity) / np.abs(middle))))
    return worst


def symbol_error(n_nodes: int = 128, k: complex = 3.0, n_max: int = 10) -> float:
    disc = sample(circle(1.0), n_nodes)
    ops = assemble_many(list(OperatorKind), k, disc)
    worst = 0.0
    for n in range(-n_max, n_max + 1):
        mode = np.exp(1j * n * disc.t)
        symbols = operator_symbols(n, k, 1.0)
        for kind, op in ops.items():
            expected = symbols[kind] * mode
            worst = max(
                worst,
                float(
                    np.max(np.abs(op.apply(mode) - expected))
                    / np.max(np.abs(expected))
                ),
            )
    return worst


def factorization_error(count: int = 100) -> float:
    rng = np.random.default_rng(SEED + 2)
    config = TransmissionConfig()
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(-15, 16))
        omega = complex(rng.uniform(0.3, 5.0), rng.uniform(-1.0, 0.2))
        m = mode_matrix_mixed(n, omega, config)
        terms = abs(m[0, 0] * m[1, 2]) + abs(m[0, 1] * m[2, 2])
        worst = max(
            worst,
            abs(det_mixed(n, omega, config) - factorized_det_mixed(n, omega, config))
            / terms,
        )
    return worst


def scalar_ssm_error() -> float:
    target = 1.2 + 0.7j
    contour = ContourSpec(center=1.0 + 0.5j, half_width=0.5, half_height=0.5)
    params = SsmParams()

    def A(z: complex) -> np.ndarray:
        return np.array([[z - target]])

    pairs = extract_eigen(compute_moments(A, contour, params), params, A)
    if len(pairs) != 1:
        return float("inf")
    return abs(pairs[0].value - target)


SUITES: list[tuple[str, Callable[[], float], float]] = [
    ("wronskian J/Y", wronskian_error, 1e-11),
    ("recurrence and parity", recurrence_error, 1e-10),
    ("circle symbols N=128", symbol_error, 1e-8),
    ("mixed determinant factorization", factorization_error, 1e-12),
    ("scalar SSM", scalar_ssm_error, 1e-10),
]


def run_selftest() -> SelftestReport:
    results = []
    for name, check, tolerance in SUITES:
        start = time.perf_counter()
        try:
            error = check()
        except Exception:  # a crashing suite is a failed suite
            logger.exception("selftest suite '%s' raised", name)
            error = float("inf")
        result = SuiteResult(
            name=name,
            max_error=error,
            tolerance=tolerance,
            seconds=time.perf_counter() - start,
        )
        logger.info("selftest %s: %.3e", name, error)
        results.append(result)
    return SelftestReport(suites=results)
