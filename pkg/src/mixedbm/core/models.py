# mixedbm.core.models

import cmath
from enum import Enum
from typing import Annotated, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from mixedbm.core.geometry import Circle, Star


class Formulation(Enum):
    BM = "bm"
    MIXED = "mixed"


class OperatorKind(Enum):
    S = "S"
    D = "D"
    DSTAR = "Dstar"
    N = "N"


class Classification(Enum):
    # legend vocabulary of the eigenvalue plots
    TRUE = "True"
    FICTITIOUS = "Fictitious"
    UNCLASSIFIED = "Unclassified"


class FieldRegion(Enum):
    EXTERIOR = "exterior"
    INTERIOR = "interior"


class TransmissionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    eps0: float = Field(default=1.0, gt=0)
    eps1: float = Field(default=4.0, gt=0)
    mu0: float = Field(default=1.0, gt=0)
    mu1: float = Field(default=1.0, gt=0)
    curve: Annotated[Union[Circle, Star], Field(discriminator="kind")] = Circle()

    def wavenumbers(self, omega: complex) -> tuple[complex, complex]:
        """k_j = omega sqrt(eps_j mu_j)"""
        omega = complex(omega)
        return (
            omega * cmath.sqrt(self.eps0 * self.mu0),
            omega * cmath.sqrt(self.eps1 * self.mu1),
        )

    @property
    def is_transparent(self) -> bool:
        return self.eps0 == self.eps1 and self.mu0 == self.mu1

    @property
    def radius(self) -> float:
        return self.curve.radius


class Rectangle(BaseModel):
    """Axis-aligned rectangle of the complex plane"""

    model_config = ConfigDict(frozen=True)

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    @model_validator(mode="after")
    def check_extent(self) -> "Rectangle":
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(
                "rectangle needs re_min < re_max and im_min < im_max, got "
                f"[{self.re_min}, {self.re_max}] x [{self.im_min}, {self.im_max}]"
            )
        if not all(
            np.isfinite([self.re_min, self.re_max, self.im_min, self.im_max])
        ):
            raise ValueError("rectangle bounds must be finite")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def center(self) -> complex:
        return complex(
            0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max)
        )

    @property
    def half_width(self) -> float:
        return 0.5 * (self.re_max - self.re_min)

    @property
    def half_height(self) -> float:
        return 0.5 * (self.im_max - self.im_min)

    def contains(self, z: complex, strict: bool = True, margin: float = 0.0) -> bool:
        z = complex(z)
        if strict:
            return (
                self.re_min - margin < z.real < self.re_max + margin
                and self.im_min - margin < z.imag < self.im_max + margin
            )
        return (
            self.re_min - margin <= z.real <= self.re_max + margin
            and self.im_min - margin <= z.imag <= self.im_max + margin
        )

    def tiles(self, nx: int, ny: int) -> list["Rectangle"]:
        """Row-major (imaginary part outer) subdivision into nx by ny tiles"""
        if nx < 1 or ny < 1:
            raise ValueError(f"tile counts must be >= 1, got ({nx}, {ny})")
        re_edges = np.linspace(self.re_min, self.re_max, nx + 1)
        im_edges = np.linspace(self.im_min, self.im_max, ny + 1)
        return [
            Rectangle(
                re_min=float(re_edges[i]),
                re_max=float(re_edges[i + 1]),
                im_min=float(im_edges[j]),
                im_max=float(im_edges[j + 1]),
            )
            for j in range(ny)
            for i in range(nx)
        ]

    def inflate(self, fraction: float) -> "Rectangle":
        dx = fraction * self.half_width
        dy = fraction * self.half_height
        return Rectangle(
            re_min=self.re_min - dx,
            re_max=self.re_max + dx,
            im_min=self.im_min - dy,
            im_max=self.im_max + dy,
        )


class EigenResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: complex
    residual: float
    classification: Classification = Classification.UNCLASSIFIED
    n: Optional[int] = None
    tile: Optional[int] = None
    multiplicity: int = 1
    converged: bool = True

    @property
    def re(self) -> float:
        return self.value.real

    @property
    def im(self) -> float:
        return self.value.imag


class BlockLayout(BaseModel):
    """Offsets of the unknowns u, q (and phi) in a block system"""

    model_config = ConfigDict(frozen=True)

    n_nodes: int
    unknowns: tuple[str, ...]

    @property
    def size(self) -> int:
        return self.n_nodes * len(self.unknowns)

    def offset(self, unknown: str) -> int:
        return self.n_nodes * self.unknowns.index(unknown)

    def slice(self, index: int) -> slice:
        return slice(index * self.n_nodes, (index + 1) * self.n_nodes)
