# mixedbm.core.systems

import logging
from typing import Callable, Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import lapack, lu_factor, lu_solve, svdvals

from mixedbm.core import layerpot
from mixedbm.core.errors import DomainError, SolverError
from mixedbm.core.geometry import CurveDiscretization
from mixedbm.core.models import (
    BlockLayout,
    Classification,
    FieldRegion,
    Formulation,
    OperatorKind,
    TransmissionConfig,
)

logger = logging.getLogger(__name__)

MAX_INCIDENT_EXPONENT = 200.0
# reciprocal condition below which the block system counts as singular
SINGULAR_RCOND = np.finfo(float).eps
# scale applied to alpha and to eps0 when labelling an eigenvalue
PERTURBATION = 2.0
SINGULAR_RATIO = 1e-6

LAYOUTS = {
    Formulation.BM: ("u", "q"),
    Formulation.MIXED: ("u", "q", "phi"),
}


class BlockOperator(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    formulation: Formulation
    omega: complex
    alpha: complex
    matrix: np.ndarray
    layout: BlockLayout

    def block(self, row: int, col: int) -> np.ndarray:
        return self.matrix[self.layout.slice(row), self.layout.slice(col)]

    def apply(self, z: npt.ArrayLike) -> np.ndarray:
        return self.matrix @ np.asarray(z, dtype=np.complex128)


def _prepare(
    config: TransmissionConfig,
    disc: CurveDiscretization,
    omega: complex,
    alpha: Optional[complex],
) -> tuple[complex, complex, complex]:
    omega = complex(omega)
    if omega == 0:
        raise DomainError("omega must be nonzero (alpha = i/k0 is undefined at 0)")
    if disc.curve != config.curve:
        raise DomainError("discretization does not belong to the configured curve")
    k0, k1 = config.wavenumbers(omega)
    return k0, k1, (1j / k0 if alpha is None else complex(alpha))


def _bm_row(
    config: TransmissionConfig, disc: CurveDiscretization, k0: complex, alpha: complex
) -> tuple[np.ndarray, np.ndarray]:
    """Exterior combined row: [(D - 1/2) + alpha N, -eps0 (S + alpha (D* + 1/2))]"""
    ops = layerpot.assemble_many(
        [OperatorKind.S, OperatorKind.D, OperatorKind.DSTAR, OperatorKind.N], k0, disc
    )
    eye = np.eye(disc.n_nodes)
    left = ops[OperatorKind.D].matrix - 0.5 * eye + alpha * ops[OperatorKind.N].matrix
    right = -config.eps0 * (
        ops[OperatorKind.S].matrix + alpha * (ops[OperatorKind.DSTAR].matrix + 0.5 * eye)
    )
    return left, right


def assemble_bm(
    config: TransmissionConfig,
    disc: CurveDiscretization,
    omega: complex,
    alpha: Optional[complex] = None,
) -> BlockOperator:
    """
    Burton-Miller system in the unknowns (u, q):

        [ (D0 - 1/2) + alpha N0    -eps0 (S0 + alpha (D0* + 1/2)) ]
        [ -(D1 + 1/2)               eps1 S1                        ]
    """
    k0, k1, alpha = _prepare(config, disc, omega, alpha)
    n = disc.n_nodes
    layout = BlockLayout(n_nodes=n, unknowns=LAYOUTS[Formulation.BM])
    matrix = np.empty((layout.size, layout.size), dtype=np.complex128)
    matrix[:n, :n], matrix[:n, n:] = _bm_row(config, disc, k0, alpha)
    interior = layerpot.assemble_many([OperatorKind.S, OperatorKind.D], k1, disc)
    matrix[n:, :n] = -(interior[OperatorKind.D].matrix + 0.5 * np.eye(n))
    matrix[n:, n:] = config.eps1 * interior[OperatorKind.S].matrix
    return BlockOperator(
        formulation=Formulation.BM,
        omega=complex(omega),
        alpha=alpha,
        matrix=matrix,
        layout=layout,
    )


def assemble_mixed(
    config: TransmissionConfig,
    disc: CurveDiscretization,
    omega: complex,
    alpha: Optional[complex] = None,
) -> BlockOperator:
    """
    Direct-indirect mixed system in the unknowns (u, q, phi):

        [ (D0 - 1/2) + alpha N0    -eps0 (S0 + alpha (D0* + 1/2))    0                   ]
        [ -I                        0                                S1                  ]
        [ 0                         -I                               (D1* + 1/2) / eps1  ]
    """
    k0, k1, alpha = _prepare(config, disc, omega, alpha)
    n = disc.n_nodes
    eye = np.eye(n)
    layout = BlockLayout(n_nodes=n, unknowns=LAYOUTS[Formulation.MIXED])
    matrix = np.zeros((layout.size, layout.size), dtype=np.complex128)
    matrix[:n, :n], matrix[:n, n : 2 * n] = _bm_row(config, disc, k0, alpha)
    interior = layerpot.assemble_many([OperatorKind.S, OperatorKind.DSTAR], k1, disc)
    matrix[n : 2 * n, :n] = -eye
    matrix[n : 2 * n, 2 * n :] = interior[OperatorKind.S].matrix
    matrix[2 * n :, n : 2 * n] = -eye
    matrix[2 * n :, 2 * n :] = (interior[OperatorKind.DSTAR].matrix + 0.5 * eye) / config.eps1
    return BlockOperator(
        formulation=Formulation.MIXED,
        omega=complex(omega),
        alpha=alpha,
        matrix=matrix,
        layout=layout,
    )


def assemble(
    formulation: Formulation,
    config: TransmissionConfig,
    disc: CurveDiscretization,
    omega: complex,
    alpha: Optional[complex] = None,
) -> BlockOperator:
    match formulation:
        case Formulation.BM:
            return assemble_bm(config, disc, omega, alpha)
        case Formulation.MIXED:
            return assemble_mixed(config, disc, omega, alpha)
    raise DomainError(f"unknown formulation {formulation}")


def operator_family(
    formulation: Formulation, config: TransmissionConfig, disc: CurveDiscretization
) -> Callable[[complex], np.ndarray]:
    """omega -> A(omega), the matrix-valued function handed to the eigensolver"""

    def family(omega: complex) -> np.ndarray:
        return assemble(formulation, config, disc, omega).matrix

    return family


def _singular_ratio(matrix: np.ndarray) -> float:
    s = svdvals(matrix, check_finite=False)
    return float(s[-1] / s[0])


def classify_by_perturbation(
    formulation: Formulation,
    config: TransmissionConfig,
    disc: CurveDiscretization,
    omega: complex,
    shift: float = PERTURBATION,
    tol: float = SINGULAR_RATIO,
) -> tuple[Classification, float, float]:
    """
    Label an eigenvalue of either system without a series solution.

    True eigenvalues belong to the transmission problem: they stay put when the
    coupling parameter changes and move with the exterior material. Fictitious
    ones either move with alpha (exterior Burton-Miller factor) or ignore eps0
    (interior factor, an exterior resonance at k1). The system is reassembled
    with alpha scaled by ``shift``, then with eps0 scaled by ``shift``, and the
    value is true when only the first stays singular, i.e. keeps its smallest
    singular value within ``tol`` of the largest. Returns the label and both
    ratios.
    """
    omega = complex(omega)
    k0, _ = config.wavenumbers(omega)
    coupled = _singular_ratio(
        assemble(formulation, config, disc, omega, alpha=shift * 1j / k0).matrix
    )
    exterior = config.model_copy(update={"eps0": shift * config.eps0})
    material = _singular_ratio(assemble(formulation, exterior, disc, omega).matrix)
    logger.debug(
        "perturbation check at %s: alpha %.2e, eps0 %.2e", omega, coupled, material
    )
    true = coupled <= tol < material
    return (
        Classification.TRUE if true else Classification.FICTITIOUS,
        coupled,
        material,
    )


class PlaneWave(BaseModel):
    """u^I(x) = amplitude exp(i k0 d.x)"""

    model_config = ConfigDict(frozen=True)

    k0: complex
    direction: tuple[float, float] = (1.0, 0.0)
    amplitude: complex = 1.0 + 0j

    @model_validator(mode="after")
    def check_direction(self) -> "PlaneWave":
        if abs(np.hypot(*self.direction) - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit vector, got {self.direction}")
        return self

    def _phase(self, points: np.ndarray) -> np.ndarray:
        return points @ np.asarray(self.direction)

    def value(self, points: npt.ArrayLike) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.amplitude * np.exp(1j * self.k0 * self._phase(pts))

    def gradient(self, points: npt.ArrayLike) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (1j * self.k0 * self.value(pts))[:, None] * np.asarray(self.direction)

    def trace(self, disc: CurveDiscretization) -> tuple[np.ndarray, np.ndarray]:
        """u^I and du^I/dn at the nodes"""
        if abs(self.k0.imag) * disc.curve.diameter() > MAX_INCIDENT_EXPONENT:
            raise DomainError(
                f"incident wave with k0={self.k0} overflows across the scatterer"
            )
        value = self.value(disc.points)
        normal = 1j * self.k0 * (disc.normals @ np.asarray(self.direction)) * value
        return value, normal


def incident_plane_wave(
    k0: complex, direction: tuple[float, float] = (1.0, 0.0), amplitude: complex = 1.0
) -> PlaneWave:
    if abs(np.hypot(*direction) - 1.0) > 1e-12:
        raise DomainError(f"direction must be a unit vector, got {direction}")
    return PlaneWave(k0=complex(k0), direction=direction, amplitude=complex(amplitude))


class BoundarySolution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    formulation: Formulation
    omega: float
    incident: PlaneWave
    u: np.ndarray
    q: np.ndarray
    phi: Optional[np.ndarray] = None
    residual: float = Field(ge=0)
    condition_estimate: float


def _condition_estimate(matrix: np.ndarray, lu: np.ndarray) -> float:
    anorm = np.linalg.norm(matrix, 1)
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0:
        return float("inf")
    return float(1.0 / rcond)


def solve_scattering(
    config: TransmissionConfig,
    disc: CurveDiscretization,
    omega: float,
    incident: PlaneWave,
    formulation: Formulation,
    alpha: Optional[complex] = None,
) -> BoundarySolution:
    if isinstance(omega, complex) or not omega > 0:
        raise DomainError(f"forward solves need a real positive omega, got {omega}")
    operator = assemble(formulation, config, disc, omega, alpha)
    n = disc.n_nodes
    u_inc, du_inc = incident.trace(disc)
    rhs = np.zeros(operator.layout.size, dtype=np.complex128)
    rhs[:n] = -(u_inc + operator.alpha * du_inc)

    lu, piv = lu_factor(operator.matrix, check_finite=False)
    condition = _condition_estimate(operator.matrix, lu)
    if 1.0 / condition < SINGULAR_RCOND:
        raise SolverError(
            f"{formulation.value} system is singular to working precision at "
            f"omega={omega} (condition ~ {condition:.3e})",
            condition,
        )
    z = lu_solve((lu, piv), rhs, check_finite=False)
    rhs_norm = np.linalg.norm(rhs)
    residual = float(
        np.linalg.norm(operator.matrix @ z - rhs) / rhs_norm if rhs_norm > 0 else 0.0
    )
    logger.info(
        "%s solve at omega=%g: N=%d residual=%.2e condition=%.2e",
        formulation.value,
        omega,
        n,
        residual,
        condition,
    )
    layout = operator.layout
    return BoundarySolution(
        formulation=formulation,
        omega=float(omega),
        incident=incident,
        u=z[layout.slice(0)],
        q=z[layout.slice(1)],
        phi=z[layout.slice(2)] if formulation is Formulation.MIXED else None,
        residual=residual,
        condition_estimate=condition,
    )


def scattered_field(
    config: TransmissionConfig,
    disc: CurveDiscretization,
    solution: BoundarySolution,
    targets: npt.ArrayLike,
) -> np.ndarray:
    """Exterior scattered field D u - eps0 S q"""
    k0, _ = config.wavenumbers(solution.omega)
    return layerpot.eval_potential(
        OperatorKind.D, k0, disc, solution.u, targets
    ) - config.eps0 * layerpot.eval_potential(OperatorKind.S, k0, disc, solution.q, targets)


def eval_field(
    config: TransmissionConfig,
    disc: CurveDiscretization,
    solution: BoundarySolution,
    targets: npt.ArrayLike,
    region: FieldRegion,
) -> np.ndarray:
    """
    Total field from the boundary data.

    Outside: U0 = u^I - eps0 S^{k0} q + D^{k0} u.
    Inside: U1 = eps1 S^{k1} q - D^{k1} u (Burton-Miller) or S^{k1} phi (mixed).
    """
    pts = np.atleast_2d(np.asarray(targets, dtype=float))
    inside = disc.curve.contains(pts)
    k0, k1 = config.wavenumbers(solution.omega)
    match region:
        case FieldRegion.EXTERIOR:
            if np.any(inside):
                raise DomainError(
                    f"{int(np.sum(inside))} exterior target(s) lie inside the curve"
                )
            return solution.incident.value(pts) + scattered_field(
                config, disc, solution, pts
            )
        case FieldRegion.INTERIOR:
            if not np.all(inside):
                raise DomainError(
                    f"{int(np.sum(~inside))} interior target(s) lie outside the curve"
                )
            if solution.phi is not None:
                return layerpot.eval_potential(OperatorKind.S, k1, disc, solution.phi, pts)
            return config.eps1 * layerpot.eval_potential(
                OperatorKind.S, k1, disc, solution.q, pts
            ) - layerpot.eval_potential(OperatorKind.D, k1, disc, solution.u, pts)
    raise DomainError(f"unknown field region {region}")


class PowerBalance(BaseModel):
    """Fluxes Im(conj(u) du/dr) through a circle enclosing the scatterer"""

    scattered: float
    extinguished: float

    @property
    def absorbed(self) -> float:
        return self.extinguished - self.scattered


def power_balance(
    config: TransmissionConfig,
    disc: CurveDiscretization,
    solution: BoundarySolution,
    radius: float,
    n_points: int = 256,
) -> PowerBalance:
    if radius <= disc.curve.diameter() / 2.0:
        raise DomainError(
            f"flux circle of radius {radius} does not enclose the scatterer"
        )
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    radial = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    pts = radius * radial
    k0, _ = config.wavenumbers(solution.omega)

    u_s = scattered_field(config, disc, solution, pts)
    grad_s = layerpot.eval_gradient(
        OperatorKind.D, k0, disc, solution.u, pts
    ) - config.eps0 * layerpot.eval_gradient(OperatorKind.S, k0, disc, solution.q, pts)
    du_s = np.sum(grad_s * radial, axis=1)
    u_i = solution.incident.value(pts)
    du_i = np.sum(solution.incident.gradient(pts) * radial, axis=1)

    weight = 2.0 * np.pi * radius / n_points
    scattered = float(np.sum(np.imag(np.conj(u_s) * du_s)) * weight)
    cross = float(np.sum(np.imag(np.conj(u_i) * du_s + np.conj(u_s) * du_i)) * weight)
    return PowerBalance(scattered=scattered, extinguished=-cross)
