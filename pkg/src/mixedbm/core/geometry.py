# mixedbm.core.geometry

from abc import ABC, abstractmethod
from typing import Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from mixedbm.core.errors import DomainError

MIN_NODES = 8


class ClosedCurve(BaseModel, ABC):
    """
    Smooth 2pi-periodic parametric curve x(t), counterclockwise.

    Subclasses provide x, x' and x''; everything else (unit tangent, outward
    normal, speed, signed curvature) is derived here.
    """

    model_config = ConfigDict(frozen=True)

    @abstractmethod
    def position(self, t: npt.ArrayLike) -> np.ndarray:
        """Points x(t), shape (..., 2)"""

    @abstractmethod
    def derivative(self, t: npt.ArrayLike) -> np.ndarray:
        """x'(t), shape (..., 2)"""

    @abstractmethod
    def second_derivative(self, t: npt.ArrayLike) -> np.ndarray:
        """x''(t), shape (..., 2)"""

    @abstractmethod
    def radius_at(self, angle: npt.ArrayLike) -> np.ndarray:
        """Distance from the origin to the curve along the polar angle"""

    @abstractmethod
    def diameter(self) -> float:
        """Upper bound of the largest chord"""

    def speed(self, t: npt.ArrayLike) -> np.ndarray:
        return np.linalg.norm(self.derivative(t), axis=-1)

    def tangent(self, t: npt.ArrayLike) -> np.ndarray:
        d = self.derivative(t)
        return d / np.linalg.norm(d, axis=-1)[..., None]

    def normal(self, t: npt.ArrayLike) -> np.ndarray:
        # outward for a counterclockwise curve
        tau = self.tangent(t)
        return np.stack([tau[..., 1], -tau[..., 0]], axis=-1)

    def curvature(self, t: npt.ArrayLike) -> np.ndarray:
        d = self.derivative(t)
        dd = self.second_derivative(t)
        cross = d[..., 0] * dd[..., 1] - d[..., 1] * dd[..., 0]
        return cross / np.linalg.norm(d, axis=-1) ** 3

    def contains(self, points: npt.ArrayLike) -> np.ndarray:
        """True for points strictly inside (the curve is star-shaped about 0)"""
        pts = np.asarray(points, dtype=float)
        rho = np.hypot(pts[..., 0], pts[..., 1])
        angle = np.arctan2(pts[..., 1], pts[..., 0])
        return rho < self.radius_at(angle)

    def perimeter(self, n_nodes: int = 256) -> float:
        return sample(self, n_nodes).perimeter()


class Circle(ClosedCurve):
    kind: Literal["circle"] = "circle"
    radius: float = Field(default=1.0, gt=0)

    def position(self, t: npt.ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def derivative(self, t: npt.ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.radius * np.stack([-np.sin(t), np.cos(t)], axis=-1)

    def second_derivative(self, t: npt.ArrayLike) -> np.ndarray:
        return -self.position(t)

    def radius_at(self, angle: npt.ArrayLike) -> np.ndarray:
        return np.full(np.shape(angle), self.radius)

    def diameter(self) -> float:
        return 2.0 * self.radius


class Star(ClosedCurve):
    """Polar curve r(t) = a (1 + delta cos(m t))"""

    kind: Literal["star"] = "star"
    radius: float = Field(default=1.0, gt=0)
    amplitude: float = Field(default=0.3, ge=0)
    lobes: int = Field(default=5, ge=3)

    @model_validator(mode="after")
    def check_star_shaped(self) -> "Star":
        if self.amplitude >= 1.0:
            raise ValueError(
                f"amplitude must be < 1 for r(t) > 0, got {self.amplitude}"
            )
        return self

    def _polar(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a, delta, m = self.radius, self.amplitude, self.lobes
        r = a * (1.0 + delta * np.cos(m * t))
        dr = -a * delta * m * np.sin(m * t)
        ddr = -a * delta * m**2 * np.cos(m * t)
        return r, dr, ddr

    def position(self, t: npt.ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        r, _, _ = self._polar(t)
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def derivative(self, t: npt.ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        r, dr, _ = self._polar(t)
        c, s = np.cos(t), np.sin(t)
        return np.stack([dr * c - r * s, dr * s + r * c], axis=-1)

    def second_derivative(self, t: npt.ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        r, dr, ddr = self._polar(t)
        c, s = np.cos(t), np.sin(t)
        return np.stack(
            [(ddr - r) * c - 2.0 * dr * s, (ddr - r) * s + 2.0 * dr * c], axis=-1
        )

    def radius_at(self, angle: npt.ArrayLike) -> np.ndarray:
        r, _, _ = self._polar(np.asarray(angle, dtype=float))
        return r

    def diameter(self) -> float:
        return 2.0 * self.radius * (1.0 + self.amplitude)


Curve = Circle | Star


def circle(a: float) -> Circle:
    if not a > 0:
        raise DomainError(f"circle radius must be positive, got {a}")
    return Circle(radius=a)


def star(a: float = 1.0, delta: float = 0.3, m: int = 5) -> Star:
    if not a > 0:
        raise DomainError(f"star radius must be positive, got {a}")
    if not 0 <= delta < 1:
        raise DomainError(f"star amplitude must satisfy 0 <= delta < 1, got {delta}")
    if int(m) != m or m < 3:
        raise DomainError(f"star lobe count must be an integer >= 3, got {m}")
    return Star(radius=a, amplitude=delta, lobes=int(m))


class CurveDiscretization(BaseModel):
    """Equispaced periodic grid t_j = 2 pi j / N with cached nodal data"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    curve: Curve
    n_nodes: int
    t: np.ndarray
    points: np.ndarray
    derivatives: np.ndarray
    second_derivatives: np.ndarray
    normals: np.ndarray
    speeds: np.ndarray
    curvatures: np.ndarray

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.n_nodes

    def weights(self) -> np.ndarray:
        """Trapezoid weights for integrals with respect to arc length"""
        return self.h * self.speeds

    def perimeter(self) -> float:
        return float(np.sum(self.weights()))

    def integrate(self, values: npt.ArrayLike) -> complex:
        return complex(np.sum(np.asarray(values) * self.weights()))

    def mesh_spacing(self) -> float:
        return float(np.max(self.speeds) * self.h)

    def distance_to(self, targets: npt.ArrayLike) -> np.ndarray:
        """Distance from each target to the nearest node"""
        pts = np.atleast_2d(np.asarray(targets, dtype=float))
        diff = pts[:, None, :] - self.points[None, :, :]
        return np.min(np.linalg.norm(diff, axis=-1), axis=1)


def sample(curve: Curve, n_nodes: int) -> CurveDiscretization:
    if int(n_nodes) != n_nodes or n_nodes % 2 != 0:
        raise DomainError(f"number of nodes must be even, got {n_nodes}")
    if n_nodes < MIN_NODES:
        raise DomainError(f"number of nodes must be >= {MIN_NODES}, got {n_nodes}")
    n_nodes = int(n_nodes)
    t = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    return CurveDiscretization(
        curve=curve,
        n_nodes=n_nodes,
        t=t,
        points=curve.position(t),
        derivatives=curve.derivative(t),
        second_derivatives=curve.second_derivative(t),
        normals=curve.normal(t),
        speeds=curve.speed(t),
        curvatures=curve.curvature(t),
    )
