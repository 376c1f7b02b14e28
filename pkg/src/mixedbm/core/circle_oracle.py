"""
Fourier-mode reduction of both boundary integral systems for a circular inclusion.

On a circle of radius a every layer operator is diagonal in the Fourier basis
e^{in theta}, with c = i pi a / 2 and the cylinder functions evaluated at ka:

    S  -> c H_n J_n
    D  -> c k (H_n' J_n + H_n J_n') / 2      (also D*)
    N  -> c k^2 H_n' J_n'

so that D - 1/2 -> c k H_n' J_n and D + 1/2 -> c k H_n J_n'. Substituting these
into the block systems gives 2x2 (Burton-Miller) and 3x3 (mixed) mode matrices
whose determinants vanish exactly at the true and fictitious eigenfrequencies.
"""

import cmath
import logging
from typing import Any, Callable, Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict

from mixedbm.core import specfun
from mixedbm.core.errors import (
    DomainError,
    NumericalFailure,
    SpecialFunctionOverflow,
    UnsupportedShapeError,
)
from mixedbm.core.geometry import Circle, CurveDiscretization
from mixedbm.core.models import (
    Classification,
    EigenResult,
    OperatorKind,
    Rectangle,
    TransmissionConfig,
)
from mixedbm.core.specfun import CylinderKind

logger = logging.getLogger(__name__)

DEFAULT_N_MAX = 30
NEWTON_MAX_ITER = 50
NEWTON_STEP = 1e-7
DEDUPE_TOL = 1e-9
EDGE_SAMPLES = 8
MAX_SUBDIVISIONS = 3


def _radius(config: TransmissionConfig) -> float:
    if not isinstance(config.curve, Circle):
        raise UnsupportedShapeError(
            f"the circle oracle needs a circular boundary, got {config.curve.kind}"
        )
    return config.curve.radius


def _check_omega(omega: complex) -> complex:
    omega = complex(omega)
    if omega == 0:
        raise DomainError("omega must be nonzero")
    return omega


def _alpha(k0: complex, alpha: Optional[complex]) -> complex:
    return 1j / k0 if alpha is None else complex(alpha)


def _cyl(n: int, z: Any) -> tuple[Any, Any, Any, Any]:
    """J_n(z), J_n'(z), H_n(z), H_n'(z), broadcasting over z"""
    return (
        specfun.bessel_j(n, z),
        specfun.cyl_deriv(CylinderKind.J, n, z),
        specfun.hankel1(n, z),
        specfun.cyl_deriv(CylinderKind.H1, n, z),
    )


def operator_symbols(n: int, k: complex, a: float) -> dict[OperatorKind, complex]:
    """Eigenvalues of the jump-free operators on e^{in theta} for the circle of radius a"""
    c = 0.5j * np.pi * a
    j, jp, h, hp = _cyl(n, k * a)
    sigma_d = c * k * (hp * j + h * jp) / 2.0
    return {
        OperatorKind.S: c * h * j,
        OperatorKind.D: sigma_d,
        OperatorKind.DSTAR: sigma_d,
        OperatorKind.N: c * k**2 * hp * jp,
    }


class BmModeMatrix(BaseModel):
    """c * diag(prefactor) @ core, the Burton-Miller system on one Fourier mode"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scale: complex
    prefactor: np.ndarray
    core: np.ndarray

    def matrix(self) -> np.ndarray:
        return self.scale * np.diag(self.prefactor) @ self.core


def _fict_factors(
    n: int, omega: complex, config: TransmissionConfig, alpha: Optional[complex]
) -> tuple[complex, complex]:
    """H_n(k1 a) and J_n(k0 a) + alpha k0 J_n'(k0 a)"""
    a = _radius(config)
    k0, k1 = config.wavenumbers(_check_omega(omega))
    j0, jp0, _, _ = _cyl(n, k0 * a)
    return (
        complex(specfun.hankel1(n, k1 * a)),
        j0 + _alpha(k0, alpha) * k0 * jp0,
    )


def mode_matrix_bm(
    n: int, omega: complex, config: TransmissionConfig, alpha: Optional[complex] = None
) -> BmModeMatrix:
    a = _radius(config)
    k0, k1 = config.wavenumbers(_check_omega(omega))
    _, _, h0, hp0 = _cyl(n, k0 * a)
    j1, jp1, _, _ = _cyl(n, k1 * a)
    h_k1, fict = _fict_factors(n, omega, config, alpha)
    core = np.array(
        [
            [k0 * hp0, -config.eps0 * h0],
            [-k1 * jp1, config.eps1 * j1],
        ],
        dtype=np.complex128,
    )
    return BmModeMatrix(
        scale=0.5j * np.pi * a,
        prefactor=np.array([fict, h_k1], dtype=np.complex128),
        core=core,
    )


def det_true(n: int, omega: complex, config: TransmissionConfig) -> complex:
    """-eps0 k1 H_n(k0 a) J_n'(k1 a) + eps1 k0 H_n'(k0 a) J_n(k1 a)"""
    a = _radius(config)
    k0, k1 = config.wavenumbers(_check_omega(omega))
    _, _, h0, hp0 = _cyl(n, k0 * a)
    j1, jp1, _, _ = _cyl(n, k1 * a)
    return complex(config.eps1 * k0 * hp0 * j1 - config.eps0 * k1 * h0 * jp1)


def det_fict(
    n: int, omega: complex, config: TransmissionConfig, alpha: Optional[complex] = None
) -> complex:
    """H_n(k1 a) (J_n(k0 a) + alpha k0 J_n'(k0 a)); with alpha = i/k0, J_n + i J_n'"""
    h_k1, fict = _fict_factors(n, omega, config, alpha)
    return h_k1 * fict


def mode_matrix_mixed(
    n: int, omega: complex, config: TransmissionConfig, alpha: Optional[complex] = None
) -> np.ndarray:
    """
    Mixed system on one Fourier mode, unknowns (u, q, phi).

    The integral blocks carry c = i pi a / 2, the identity blocks do not:

        [ c k0 H' F   -eps0 c H F   0                      ]
        [ -1          0             c H(k1a) J(k1a)         ]
        [ 0           -1            c (k1/eps1) H(k1a) J'(k1a) ]

    with F = J_n(k0 a) + alpha k0 J_n'(k0 a).
    """
    a = _radius(config)
    c = 0.5j * np.pi * a
    k0, k1 = config.wavenumbers(_check_omega(omega))
    _, _, h0, hp0 = _cyl(n, k0 * a)
    j1, jp1, h1, _ = _cyl(n, k1 * a)
    _, fict = _fict_factors(n, omega, config, alpha)
    return np.array(
        [
            [c * k0 * hp0 * fict, -config.eps0 * c * h0 * fict, 0.0],
            [-1.0, 0.0, c * h1 * j1],
            [0.0, -1.0, c * (k1 / config.eps1) * h1 * jp1],
        ],
        dtype=np.complex128,
    )


def factorized_det_mixed(
    n: int, omega: complex, config: TransmissionConfig, alpha: Optional[complex] = None
) -> complex:
    """c^2 det_fict [k0 H'(k0a) J(k1a) - (eps0/eps1) k1 H(k0a) J'(k1a)]"""
    c = 0.5j * np.pi * _radius(config)
    fict = det_fict(n, omega, config, alpha)
    return c**2 * fict * det_true(n, omega, config) / config.eps1


def det_mixed(
    n: int, omega: complex, config: TransmissionConfig, alpha: Optional[complex] = None
) -> complex:
    """Rule of Sarrus on the 3x3 mode matrix"""
    m = mode_matrix_mixed(n, omega, config, alpha)
    return complex(
        m[0, 0] * m[1, 1] * m[2, 2]
        + m[0, 1] * m[1, 2] * m[2, 0]
        + m[0, 2] * m[1, 0] * m[2, 1]
        - m[0, 2] * m[1, 1] * m[2, 0]
        - m[0, 0] * m[1, 2] * m[2, 1]
        - m[0, 1] * m[1, 0] * m[2, 2]
    )


# Root finding


class _Factor(BaseModel):
    """
    One analytic factor whose zeros are eigenfrequencies.

    ``evaluate`` broadcasts over omega and returns the value and the sum of the
    magnitudes of its terms, which normalizes the residual.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    classification: Classification
    evaluate: Callable[[Any], tuple[Any, Any]]

    def value(self, omega: complex) -> complex:
        return complex(self.evaluate(omega)[0])

    def residual(self, omega: complex) -> float:
        value, terms = self.evaluate(omega)
        return float(abs(value) / max(float(terms), np.finfo(float).tiny))


def _factors(n: int, config: TransmissionConfig) -> list[_Factor]:
    a = _radius(config)
    s0 = np.sqrt(config.eps0 * config.mu0)
    s1 = np.sqrt(config.eps1 * config.mu1)

    def true_factor(w: Any) -> tuple[Any, Any]:
        k0, k1 = w * s0, w * s1
        _, _, h0, hp0 = _cyl(n, k0 * a)
        j1, jp1, _, _ = _cyl(n, k1 * a)
        left = config.eps1 * k0 * hp0 * j1
        right = config.eps0 * k1 * h0 * jp1
        return left - right, np.abs(left) + np.abs(right)

    def hankel_factor(w: Any) -> tuple[Any, Any]:
        z = w * s1 * a
        j, y = specfun.bessel_j(n, z), specfun.bessel_y(n, z)
        return specfun.hankel1(n, z), np.abs(j) + np.abs(y)

    def bessel_factor(w: Any) -> tuple[Any, Any]:
        j, jp, _, _ = _cyl(n, w * s0 * a)
        return j + 1j * jp, np.abs(j) + np.abs(jp)

    return [
        _Factor(name="true", classification=Classification.TRUE, evaluate=true_factor),
        _Factor(
            name="hankel",
            classification=Classification.FICTITIOUS,
            evaluate=hankel_factor,
        ),
        _Factor(
            name="bessel",
            classification=Classification.FICTITIOUS,
            evaluate=bessel_factor,
        ),
    ]


def root_residual(n: int, omega: complex, config: TransmissionConfig) -> float:
    """Relative size of the smallest factor of the mode determinants at omega"""
    return min(factor.residual(omega) for factor in _factors(n, config))


def winding_numbers(
    values: np.ndarray, grid: tuple[int, int], samples: int = EDGE_SAMPLES
) -> np.ndarray:
    """
    Discrete argument principle on every cell of a lattice.

    ``values`` are samples on a ((ny * samples + 1), (nx * samples + 1)) lattice,
    imaginary part along axis 0. Returns the (ny, nx) array of winding numbers.
    """
    nx, ny = grid
    safe = np.where(values == 0, np.finfo(float).tiny, values)
    horizontal = np.angle(safe[:, 1:] / safe[:, :-1])
    vertical = np.angle(safe[1:, :] / safe[:-1, :])
    rows = horizontal[::samples, :].reshape(ny + 1, nx, samples).sum(axis=-1)
    cols = vertical[:, ::samples].reshape(ny, samples, nx + 1).sum(axis=1)
    total = rows[:-1, :] + cols[:, 1:] - rows[1:, :] - cols[:, :-1]
    return np.rint(total / (2.0 * np.pi)).astype(int)


def newton(
    func: Callable[[complex], complex], z0: complex, max_iter: int = NEWTON_MAX_ITER
) -> tuple[complex, bool]:
    """Complex Newton with a central-difference derivative"""
    z = complex(z0)
    for iteration in range(max_iter):
        scale = max(1.0, abs(z))
        h = NEWTON_STEP * scale
        f = func(z)
        if f == 0:
            return z, True
        slope = (func(z + h) - func(z - h)) / (2.0 * h)
        if slope == 0 or not cmath.isfinite(slope):
            return z, False
        step = f / slope
        z -= step
        logger.debug("newton %d: z=%s |step|=%.3e", iteration, z, abs(step))
        if abs(step) <= 1e-14 * scale:
            return z, True
    return z, False


def _lattice(region: Rectangle, grid: tuple[int, int]) -> np.ndarray:
    nx, ny = grid
    re = np.linspace(region.re_min, region.re_max, nx * EDGE_SAMPLES + 1)
    im = np.linspace(region.im_min, region.im_max, ny * EDGE_SAMPLES + 1)
    return re[None, :] + 1j * im[:, None]


def _is_new(z: complex, roots: list[tuple[complex, bool]]) -> bool:
    return all(abs(z - other) > DEDUPE_TOL for other, _ in roots)


def _cell_zeros(
    evaluate: Callable[[Any], Any], cell: Rectangle, winding: int, depth: int
) -> list[tuple[complex, bool]]:
    """Newton from the center, then quarter the cell while it holds unfound zeros"""
    z, converged = newton(lambda w: complex(evaluate(w)), cell.center)
    inside = converged and cell.contains(z, strict=False, margin=DEDUPE_TOL)
    found = [(z, converged)] if inside else []
    if len(found) >= winding:
        return found
    if depth >= MAX_SUBDIVISIONS:
        # a converged root in a neighbour is deduplicated by the caller
        return found or [(z, converged)]
    quarters = cell.tiles(2, 2)
    windings = winding_numbers(np.asarray(evaluate(_lattice(cell, (2, 2)))), (2, 2))
    for j, i in zip(*np.nonzero(windings > 0)):
        for root in _cell_zeros(evaluate, quarters[j * 2 + i], windings[j, i], depth + 1):
            if _is_new(root[0], found):
                found.append(root)
    return found


def locate_zeros(
    evaluate: Callable[[Any], Any],
    region: Rectangle,
    grid: tuple[int, int] = (32, 16),
) -> tuple[list[tuple[complex, bool]], int]:
    """
    Zeros of an analytic function inside ``region``, with convergence flags.

    ``evaluate`` must broadcast over arrays of omega. Every cell of the grid
    with a positive winding number seeds Newton at its center. A cell that
    yields fewer distinct zeros than its winding number is quartered and
    searched again, at most MAX_SUBDIVISIONS times. Also returns the summed
    winding number, which equals the zero count with multiplicity.
    """
    nx, _ = grid
    winding = winding_numbers(np.asarray(evaluate(_lattice(region, grid))), grid)
    cells = region.tiles(*grid)
    roots: list[tuple[complex, bool]] = []
    for j, i in zip(*np.nonzero(winding > 0)):
        for z, converged in _cell_zeros(evaluate, cells[j * nx + i], winding[j, i], 0):
            if region.contains(z, strict=False) and _is_new(z, roots):
                roots.append((z, converged))
    return roots, int(winding[winding > 0].sum())


def find_eigen(
    region: Rectangle,
    config: TransmissionConfig,
    n_max: int = DEFAULT_N_MAX,
    grid: tuple[int, int] = (32, 16),
) -> list[EigenResult]:
    """
    Zeros of the true and fictitious determinants inside ``region``.

    Modes n and -n share every zero, so only n >= 0 is scanned. Zeros are
    deduplicated per mode and factor, and a factor whose converged zeros do
    not add up to its winding number is reported in the log.
    """
    _radius(config)
    if region.contains(0.0, strict=False):
        raise DomainError("search region must not contain omega = 0")
    found: list[EigenResult] = []
    for n in range(n_max + 1):
        for factor in _factors(n, config):
            try:
                zeros, winding = locate_zeros(
                    lambda w, f=factor: f.evaluate(w)[0], region, grid
                )
            except SpecialFunctionOverflow:
                logger.warning(
                    "skipping n=%d (%s): factor overflows in the region", n, factor.name
                )
                continue
            located = sum(1 for _, converged in zeros if converged)
            if located != winding:
                logger.warning(
                    "n=%d (%s): %d zero(s) located for a winding number of %d",
                    n,
                    factor.name,
                    located,
                    winding,
                )
            for z, converged in zeros:
                residual = factor.residual(z)
                if not converged:
                    logger.warning(
                        "newton did not converge for n=%d (%s) near %s, residual %.2e",
                        n,
                        factor.name,
                        z,
                        residual,
                    )
                found.append(
                    EigenResult(
                        value=z,
                        residual=residual,
                        classification=factor.classification,
                        n=n,
                        converged=converged,
                    )
                )
    found.sort(key=lambda e: (e.value.real, e.value.imag, e.n))
    logger.info("oracle: %d eigenvalue(s) for n <= %d", len(found), n_max)
    return found


def classify(
    value: complex, config: TransmissionConfig, n_max: int = DEFAULT_N_MAX
) -> tuple[int, Classification, float]:
    """Mode, label and residual of the factor that is smallest at ``value``"""
    best: Optional[tuple[int, Classification, float]] = None
    for n in range(n_max + 1):
        for factor in _factors(n, config):
            try:
                residual = factor.residual(value)
            except SpecialFunctionOverflow:
                continue
            if best is None or residual < best[2]:
                best = (n, factor.classification, residual)
    if best is None:
        raise SpecialFunctionOverflow(f"no mode factor can be evaluated at {value}")
    return best


# Mie series


class MieSolution(BaseModel):
    """Per-mode coefficients of the scattered (a_n) and transmitted (b_n) fields"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    config: TransmissionConfig
    omega: float
    direction: tuple[float, float]
    orders: np.ndarray
    incident: np.ndarray
    scattered: np.ndarray
    transmitted: np.ndarray

    def _angles(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.hypot(points[:, 0], points[:, 1]), np.arctan2(
            points[:, 1], points[:, 0]
        )

    def _series(
        self,
        coefficients: np.ndarray,
        kind: CylinderKind,
        k: complex,
        radius: np.ndarray,
        theta: np.ndarray,
        derivative: bool = False,
    ) -> np.ndarray:
        z = k * radius[:, None]
        orders = self.orders[None, :]
        if derivative:
            radial = k * np.asarray(specfun.cyl_deriv(kind, orders, z))
        else:
            radial = np.asarray(specfun.evaluate(kind, orders, z))
        return np.sum(coefficients * radial * np.exp(1j * orders * theta[:, None]), axis=1)

    def traces(self, disc: CurveDiscretization) -> tuple[np.ndarray, np.ndarray]:
        """u and q = (1/eps0) du/dn on the exterior side at the nodes of ``disc``"""
        k0, _ = self.config.wavenumbers(self.omega)
        radius, theta = self._angles(disc.points)
        u = self._series(self.incident, CylinderKind.J, k0, radius, theta) + self._series(
            self.scattered, CylinderKind.H1, k0, radius, theta
        )
        du = self._series(
            self.incident, CylinderKind.J, k0, radius, theta, derivative=True
        ) + self._series(self.scattered, CylinderKind.H1, k0, radius, theta, derivative=True)
        return u, du / self.config.eps0

    def interior_traces(self, disc: CurveDiscretization) -> tuple[np.ndarray, np.ndarray]:
        """u and (1/eps1) du/dn from the inside"""
        _, k1 = self.config.wavenumbers(self.omega)
        radius, theta = self._angles(disc.points)
        u = self._series(self.transmitted, CylinderKind.J, k1, radius, theta)
        du = self._series(
            self.transmitted, CylinderKind.J, k1, radius, theta, derivative=True
        )
        return u, du / self.config.eps1

    def scattered_field(self, points: npt.ArrayLike) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        k0, _ = self.config.wavenumbers(self.omega)
        radius, theta = self._angles(pts)
        return self._series(self.scattered, CylinderKind.H1, k0, radius, theta)

    def field(self, points: npt.ArrayLike) -> np.ndarray:
        """Total field: incident plus scattered outside, transmitted inside"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        k0, k1 = self.config.wavenumbers(self.omega)
        radius, theta = self._angles(pts)
        inside = radius < self.config.radius
        values = np.empty(len(pts), dtype=np.complex128)
        if np.any(inside):
            values[inside] = self._series(
                self.transmitted, CylinderKind.J, k1, radius[inside], theta[inside]
            )
        outside = ~inside
        if np.any(outside):
            values[outside] = self._series(
                self.incident, CylinderKind.J, k0, radius[outside], theta[outside]
            ) + self._series(
                self.scattered, CylinderKind.H1, k0, radius[outside], theta[outside]
            )
        return values

    def scattered_power(self) -> float:
        """Outgoing flux of the scattered field, int Im(conj(u) du/dr) ds"""
        return float(4.0 * np.sum(np.abs(self.scattered) ** 2))

    def extinguished_power(self) -> float:
        return float(-4.0 * np.sum(np.real(np.conj(self.incident) * self.scattered)))


def minimum_modes(k0a: float) -> int:
    return int(np.ceil(k0a + 10.0 * k0a ** (1.0 / 3.0) + 15.0))


def mie_transmission(
    config: TransmissionConfig,
    omega: float,
    direction: tuple[float, float] = (1.0, 0.0),
    n_max: Optional[int] = None,
) -> MieSolution:
    a = _radius(config)
    if isinstance(omega, complex) or not omega > 0:
        raise DomainError(f"the series solution needs a real positive omega, got {omega}")
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise DomainError(f"direction must be a unit vector, got {direction}")
    k0, k1 = config.wavenumbers(omega)
    needed = minimum_modes(abs(k0) * a)
    if n_max is None:
        n_max = needed
    elif n_max < needed:
        raise DomainError(f"n_max={n_max} below the truncation bound {needed}")
    theta_d = float(np.arctan2(d[1], d[0]))
    orders = np.arange(-n_max, n_max + 1)
    incident = (1j**orders) * np.exp(-1j * orders * theta_d)
    scattered = np.empty(orders.size, dtype=np.complex128)
    transmitted = np.empty(orders.size, dtype=np.complex128)
    for index, n in enumerate(orders):
        j0, jp0, h0, hp0 = _cyl(int(n), k0 * a)
        j1, jp1, _, _ = _cyl(int(n), k1 * a)
        system = np.array(
            [
                [h0, -j1],
                [(k0 / config.eps0) * hp0, -(k1 / config.eps1) * jp1],
            ]
        )
        rhs = -incident[index] * np.array([j0, (k0 / config.eps0) * jp0])
        try:
            scattered[index], transmitted[index] = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(
                f"mode {n} of the series solution is singular at omega={omega}"
            ) from exc
    return MieSolution(
        config=config,
        omega=float(omega),
        direction=(float(d[0]), float(d[1])),
        orders=orders,
        incident=incident,
        scattered=scattered,
        transmitted=transmitted,
    )
