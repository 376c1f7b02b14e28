"""
Nystrom discretization of the Helmholtz layer operators on a smooth closed curve.

With G(x, y) = (i/4) H_0^(1)(k|x - y|) and the outward normal n:

    S phi(x)  = int G(x, y) phi(y) ds(y)
    D phi(x)  = int dG/dn(y) phi(y) ds(y)
    D* phi(x) = int dG/dn(x) phi(y) ds(y)
    N phi(x)  = d/dn(x) int dG/dn(y) phi(y) ds(y)

All matrices are jump-free (principal value); the +-1/2 identity terms belong
to the callers.

Quadrature
----------
Each weakly singular kernel is split in the parameter t of the curve as

    K(t, s) = M1(t, s) log(4 sin^2((t - s)/2)) + M2(t, s)

with M1, M2 smooth. The log part is integrated with the exact Fourier weights
of the trigonometric interpolant (Martensen-Kussmaul / Kress):

    R_d = -(4 pi / N) sum_{m=1}^{N/2-1} cos(2 pi m d / N) / m - (4 pi / N^2) (-1)^d

and the smooth part with the trapezoid rule, so that

    A_ij = R_|i-j| M1(t_i, t_j) + (2 pi / N) M2(t_i, t_j).

Diagonal limits (x' = dx/dt, kappa the signed curvature, gamma Euler's constant):

    S:      M1 = -J_0(kr) |x'| / (4 pi)
            M2(t, t) = (i/4 - gamma/(2 pi) - log(k |x'| / 2) / (2 pi)) |x'|
    D:      M1 = -(k / 4 pi) (x - y).n(y) J_1(kr) / r |x'|,  M1(t, t) = 0
            M2(t, t) = -kappa |x'| / (4 pi)
    D*:     M1 = (k / 4 pi) (x - y).n(x) J_1(kr) / r |x'|,   M1(t, t) = 0
            M2(t, t) = -kappa |x'| / (4 pi)

The hypersingular operator is regularized with Maue's identity

    N phi = d/ds S (d phi / ds) + k^2 n(x) . S (n phi)

where d/dt is the spectral differentiation matrix of the periodic grid.
"""

import logging
from typing import Iterable

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict
from scipy.linalg import circulant

from mixedbm.core import specfun
from mixedbm.core.errors import DomainError, NearFieldError
from mixedbm.core.geometry import CurveDiscretization
from mixedbm.core.models import OperatorKind

logger = logging.getLogger(__name__)

NEAR_FIELD_FACTOR = 4.0


class BoundaryOperatorMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: OperatorKind
    k: complex
    matrix: np.ndarray

    def apply(self, density: npt.ArrayLike) -> np.ndarray:
        return self.matrix @ np.asarray(density, dtype=np.complex128)


def log_weights(n_nodes: int) -> np.ndarray:
    """Circulant matrix of the weights R_|i-j| for the log(4 sin^2) kernel"""
    m = np.arange(1, n_nodes // 2)
    d = np.arange(n_nodes)
    phases = np.cos(2.0 * np.pi * np.outer(d, m) / n_nodes)
    column = -(4.0 * np.pi / n_nodes) * (phases @ (1.0 / m))
    column -= (4.0 * np.pi / n_nodes**2) * (-1.0) ** d
    return circulant(column)


def spectral_derivative(n_nodes: int) -> np.ndarray:
    """d/dt of the trigonometric interpolant on the equispaced periodic grid"""
    h = 2.0 * np.pi / n_nodes
    d = np.arange(n_nodes)
    column = np.zeros(n_nodes)
    nonzero = d[1:]
    column[1:] = 0.5 * (-1.0) ** nonzero / np.tan(nonzero * h / 2.0)
    return circulant(column)


def _check_wavenumber(k: complex, disc: CurveDiscretization) -> complex:
    k = complex(k)
    if not np.isfinite(k):
        raise DomainError(f"wavenumber must be finite, got {k}")
    if k == 0:
        raise DomainError("wavenumber must be nonzero")
    if abs(k.imag) * disc.curve.diameter() > specfun.MAX_ABS_IMAG:
        raise DomainError(
            f"wavenumber {k} outside the special-function support for a curve of "
            f"diameter {disc.curve.diameter():g}"
        )
    return k


class _KernelData:
    """Pairwise geometry and cylinder functions shared by all operators at one k"""

    def __init__(self, k: complex, disc: CurveDiscretization):
        self.k = k
        self.disc = disc
        n = disc.n_nodes
        diff = disc.points[:, None, :] - disc.points[None, :, :]
        r = np.linalg.norm(diff, axis=-1)
        self.off = ~np.eye(n, dtype=bool)
        # unit placeholder on the diagonal; every diagonal entry is overwritten
        r_safe = np.where(self.off, r, 1.0)
        self.r = r_safe
        self.diff = diff
        kr = k * r_safe
        self.h0 = np.asarray(specfun.hankel1(0, kr))
        self.h1 = np.asarray(specfun.hankel1(1, kr))
        self.j0 = np.asarray(specfun.bessel_j(0, kr))
        self.j1 = np.asarray(specfun.bessel_j(1, kr))
        t = disc.t
        log_sin = np.log(4.0 * np.sin((t[:, None] - t[None, :]) / 2.0) ** 2 + ~self.off)
        self.log_sin = np.where(self.off, log_sin, 0.0)
        self.weights = log_weights(n)

    def _combine(self, m1: np.ndarray, kernel: np.ndarray, m2_diag: np.ndarray) -> np.ndarray:
        m2 = kernel - m1 * self.log_sin
        np.fill_diagonal(m2, m2_diag)
        return self.weights * m1 + self.disc.h * m2

    def single_layer(self, with_speed: bool = True) -> np.ndarray:
        disc, k = self.disc, self.k
        speed = disc.speeds if with_speed else np.ones(disc.n_nodes)
        m1 = -self.j0 * speed[None, :] / (4.0 * np.pi)
        np.fill_diagonal(m1, -speed / (4.0 * np.pi))
        kernel = 0.25j * self.h0 * speed[None, :]
        diag = (
            0.25j
            - np.euler_gamma / (2.0 * np.pi)
            - np.log(k * disc.speeds / 2.0) / (2.0 * np.pi)
        ) * speed
        return self._combine(m1, kernel, diag)

    def double_layer(self, adjoint: bool) -> np.ndarray:
        disc, k = self.disc, self.k
        if adjoint:
            # (x - y).n(x) and d/dn(x) G = -(ik/4) H_1 (x - y).n(x) / r
            proj = np.einsum("ijk,ik->ij", self.diff, disc.normals)
            sign = -1.0
        else:
            proj = np.einsum("ijk,jk->ij", self.diff, disc.normals)
            sign = 1.0
        proj = np.where(self.off, proj, 0.0)
        speed = disc.speeds[None, :]
        kernel = sign * 0.25j * k * self.h1 * proj / self.r * speed
        m1 = -sign * (k / (4.0 * np.pi)) * self.j1 * proj / self.r * speed
        diag = -disc.curvatures * disc.speeds / (4.0 * np.pi)
        return self._combine(m1, kernel, diag)

    def hypersingular(self) -> np.ndarray:
        disc, k = self.disc, self.k
        dt = spectral_derivative(disc.n_nodes)
        tangential = (dt @ self.single_layer(with_speed=False) @ dt) / disc.speeds[:, None]
        nn = disc.normals @ disc.normals.T
        return tangential + k**2 * self.single_layer() * nn

    def build(self, kind: OperatorKind) -> np.ndarray:
        match kind:
            case OperatorKind.S:
                return self.single_layer()
            case OperatorKind.D:
                return self.double_layer(adjoint=False)
            case OperatorKind.DSTAR:
                return self.double_layer(adjoint=True)
            case OperatorKind.N:
                return self.hypersingular()
        raise DomainError(f"unknown operator kind {kind}")


def assemble_many(
    kinds: Iterable[OperatorKind], k: complex, disc: CurveDiscretization
) -> dict[OperatorKind, BoundaryOperatorMatrix]:
    """Assemble several operators at one wavenumber, sharing kernel evaluations"""
    k = _check_wavenumber(k, disc)
    data = _KernelData(k, disc)
    result = {}
    for kind in kinds:
        matrix = data.build(kind)
        if not np.all(np.isfinite(matrix)):
            raise DomainError(f"non-finite entries assembling {kind.value} at k={k}")
        result[kind] = BoundaryOperatorMatrix(kind=kind, k=k, matrix=matrix)
    logger.debug(
        "assembled %s at k=%s on N=%d",
        ",".join(kind.value for kind in result),
        k,
        disc.n_nodes,
    )
    return result


def assemble(
    kind: OperatorKind, k: complex, disc: CurveDiscretization
) -> BoundaryOperatorMatrix:
    return assemble_many([kind], k, disc)[kind]


def _targets(disc: CurveDiscretization, targets: npt.ArrayLike) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(targets, dtype=float))
    if pts.shape[-1] != 2:
        raise DomainError(f"targets must have shape (M, 2), got {pts.shape}")
    limit = NEAR_FIELD_FACTOR * disc.mesh_spacing()
    too_close = np.flatnonzero(disc.distance_to(pts) <= limit)
    if too_close.size:
        raise NearFieldError(
            f"{too_close.size} target(s) within {limit:.3g} of the boundary",
            too_close.tolist(),
        )
    return pts


def _kernel_terms(
    k: complex, disc: CurveDiscretization, pts: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    diff = pts[:, None, :] - disc.points[None, :, :]
    r = np.linalg.norm(diff, axis=-1)
    return diff, r, k * r


def eval_potential(
    kind: OperatorKind,
    k: complex,
    disc: CurveDiscretization,
    density: npt.ArrayLike,
    targets: npt.ArrayLike,
) -> np.ndarray:
    """Single- or double-layer potential of a nodal density at off-boundary targets"""
    k = _check_wavenumber(k, disc)
    pts = _targets(disc, targets)
    phi = np.asarray(density, dtype=np.complex128) * disc.weights()
    diff, r, kr = _kernel_terms(k, disc, pts)
    match kind:
        case OperatorKind.S:
            kernel = 0.25j * np.asarray(specfun.hankel1(0, kr))
        case OperatorKind.D:
            proj = np.einsum("ijk,jk->ij", diff, disc.normals)
            kernel = 0.25j * k * np.asarray(specfun.hankel1(1, kr)) * proj / r
        case _:
            raise DomainError(f"no off-boundary potential for {kind.value}")
    return kernel @ phi


def eval_gradient(
    kind: OperatorKind,
    k: complex,
    disc: CurveDiscretization,
    density: npt.ArrayLike,
    targets: npt.ArrayLike,
) -> np.ndarray:
    """Gradient of the potential at off-boundary targets, shape (M, 2)"""
    k = _check_wavenumber(k, disc)
    pts = _targets(disc, targets)
    phi = np.asarray(density, dtype=np.complex128) * disc.weights()
    diff, r, kr = _kernel_terms(k, disc, pts)
    h1 = np.asarray(specfun.hankel1(1, kr))
    match kind:
        case OperatorKind.S:
            # grad_x G = -(ik/4) H_1(kr) (x - y) / r
            grad = -0.25j * k * (h1 / r)[..., None] * diff
        case OperatorKind.D:
            # d/dr (H_1(kr)/r) = k H_0(kr)/r - 2 H_1(kr)/r^2
            h0 = np.asarray(specfun.hankel1(0, kr))
            proj = np.einsum("ijk,jk->ij", diff, disc.normals)
            radial = proj * (k * h0 / r - 2.0 * h1 / r**2) / r
            grad = 0.25j * k * (
                (h1 / r)[..., None] * disc.normals[None, :, :]
                + radial[..., None] * diff
            )
        case _:
            raise DomainError(f"no off-boundary potential for {kind.value}")
    return np.einsum("ijk,j->ik", grad, phi)
