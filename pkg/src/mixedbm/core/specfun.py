"""
Integer-order cylinder functions of complex argument.

J_n, Y_n and H_n^(1) are evaluated by the AMOS routines exposed in
``scipy.special``. Those routines already switch between power series,
backward recurrence and large-argument expansions, and they evaluate
H_n^(1) directly (not as J_n + iY_n), so the exponential cancellation for
Im z >> 0 never happens. This module adds what the callers rely on:

- a declared support box, checked before evaluation,
- negative orders reduced to n >= 0 by parity,
- a singularity error for Y_n and H_n^(1) at z = 0,
- the guarantee that no NaN or Inf leaves a public function.

Every function broadcasts over ``n`` and ``z`` and is a pure function of
its arguments.
"""

from enum import Enum
from typing import Union

import numpy as np
import numpy.typing as npt
from scipy import special

from mixedbm.core.errors import DomainError, SingularityError, SpecialFunctionOverflow

MAX_ORDER = 200
MAX_ABS_ARG = 400.0
MAX_ABS_IMAG = 100.0

ComplexLike = Union[complex, float, npt.ArrayLike]


class CylinderKind(Enum):
    J = "J"
    Y = "Y"
    H1 = "H1"


def _prepare(n: npt.ArrayLike, z: ComplexLike) -> tuple[np.ndarray, np.ndarray]:
    orders = np.asarray(n)
    if not np.issubdtype(orders.dtype, np.integer):
        if not np.all(np.equal(np.mod(orders, 1), 0)):
            raise DomainError("only integer orders are supported")
        orders = orders.astype(np.int64)
    args = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(orders) > MAX_ORDER):
        raise DomainError(f"order outside support box |n| <= {MAX_ORDER}")
    if not np.all(np.isfinite(args)):
        raise DomainError("non-finite argument")
    if np.any(np.abs(args) > MAX_ABS_ARG):
        raise DomainError(f"argument outside support box |z| <= {MAX_ABS_ARG}")
    if np.any(np.abs(args.imag) > MAX_ABS_IMAG):
        raise DomainError(f"argument outside support box |Im z| <= {MAX_ABS_IMAG}")
    return orders, args


def _no_zero(args: np.ndarray, name: str) -> None:
    if np.any(args == 0):
        raise SingularityError(f"{name} is singular at z = 0")


def _finish(values: np.ndarray, name: str) -> Union[complex, np.ndarray]:
    if not np.all(np.isfinite(values)):
        raise SpecialFunctionOverflow(
            f"{name} overflows double precision inside the support box"
        )
    if values.ndim == 0:
        return complex(values)
    return values


def _parity(orders: np.ndarray) -> np.ndarray:
    # C_{-n} = (-1)^n C_n for J, Y and H1
    return np.where((orders < 0) & (orders % 2 == 1), -1.0, 1.0)


def bessel_j(n: npt.ArrayLike, z: ComplexLike) -> Union[complex, np.ndarray]:
    """J_n(z)"""
    orders, args = _prepare(n, z)
    values = _parity(orders) * special.jv(np.abs(orders), args)
    return _finish(np.asarray(values, dtype=np.complex128), "J_n")


def bessel_y(n: npt.ArrayLike, z: ComplexLike) -> Union[complex, np.ndarray]:
    """Y_n(z), z != 0"""
    orders, args = _prepare(n, z)
    _no_zero(args, "Y_n")
    values = _parity(orders) * special.yv(np.abs(orders), args)
    return _finish(np.asarray(values, dtype=np.complex128), "Y_n")


def hankel1(n: npt.ArrayLike, z: ComplexLike) -> Union[complex, np.ndarray]:
    """H_n^(1)(z) = J_n(z) + i Y_n(z), z != 0"""
    orders, args = _prepare(n, z)
    _no_zero(args, "H_n^(1)")
    values = _parity(orders) * special.hankel1(np.abs(orders), args)
    return _finish(np.asarray(values, dtype=np.complex128), "H_n^(1)")


def cyl_deriv(
    kind: CylinderKind, n: npt.ArrayLike, z: ComplexLike
) -> Union[complex, np.ndarray]:
    """
    First derivative C_n'(z) of the cylinder function family ``kind``.

    Computed as (C_{n-1} - C_{n+1})/2, which equals C_{n-1} - (n/z) C_n and
    stays regular for J at z = 0.
    """
    orders, args = _prepare(n, z)
    sign = _parity(orders)
    order = np.abs(orders)
    match kind:
        case CylinderKind.J:
            values = special.jvp(order, args, 1)
        case CylinderKind.Y:
            _no_zero(args, "Y_n'")
            values = special.yvp(order, args, 1)
        case CylinderKind.H1:
            _no_zero(args, "H_n^(1)'")
            values = special.h1vp(order, args, 1)
        case _:
            raise DomainError(f"unknown cylinder function kind {kind}")
    return _finish(np.asarray(sign * values, dtype=np.complex128), f"{kind.value}_n'")


def evaluate(
    kind: CylinderKind, n: npt.ArrayLike, z: ComplexLike
) -> Union[complex, np.ndarray]:
    """Dispatch on the cylinder function family"""
    match kind:
        case CylinderKind.J:
            return bessel_j(n, z)
        case CylinderKind.Y:
            return bessel_y(n, z)
        case CylinderKind.H1:
            return hankel1(n, z)
    raise DomainError(f"unknown cylinder function kind {kind}")


def wronskian(
    first: CylinderKind, second: CylinderKind, n: npt.ArrayLike, z: ComplexLike
) -> Union[complex, np.ndarray]:
    """C1_n(z) C2_n'(z) - C1_n'(z) C2_n(z)"""
    c1 = np.asarray(evaluate(first, n, z))
    c2 = np.asarray(evaluate(second, n, z))
    d1 = np.asarray(cyl_deriv(first, n, z))
    d2 = np.asarray(cyl_deriv(second, n, z))
    return _finish(np.asarray(c1 * d2 - d1 * c2, dtype=np.complex128), "wronskian")
