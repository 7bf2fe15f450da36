"""Mobius maps between the half-plane and the disk, with exact derivatives.

Only the three families the rest of the toolkit needs: the Cayley transform,
half-plane automorphisms gamma_zeta(z) = (z - zeta)/(z - conj(zeta)), and
disk automorphisms tau_w0(w) = (w - w0)/(1 - conj(w0) w).  Everything is
plain complex arithmetic in double precision; these maps are the metrology
every classifier relies on, so no approximation is allowed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UPPER = "upper"
LOWER = "lower"
DISK = "disk"


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float
    domain: str = UPPER

    def __post_init__(self):
        if self.domain == UPPER and self.y <= 0:
            raise DomainError(f"upper half-plane point needs y > 0, got y={self.y}")
        if self.domain == LOWER and self.y >= 0:
            raise DomainError(f"lower half-plane point needs y < 0, got y={self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @staticmethod
    def from_complex(z: complex) -> "HalfPlanePoint":
        return HalfPlanePoint(z.real, z.imag, UPPER if z.imag > 0 else LOWER)

    def conjugate(self) -> "HalfPlanePoint":
        return HalfPlanePoint(self.x, -self.y, LOWER if self.domain == UPPER else UPPER)


@dataclass(frozen=True)
class DiskPoint:
    re: float
    im: float

    def __post_init__(self):
        if self.re * self.re + self.im * self.im >= 1.0:
            raise DomainError("disk point needs |w| < 1")

    @property
    def w(self) -> complex:
        return complex(self.re, self.im)

    @staticmethod
    def from_complex(w: complex) -> "DiskPoint":
        return DiskPoint(w.real, w.imag)


def cayley(p: HalfPlanePoint | complex) -> DiskPoint:
    """gamma(z) = (z - i)/(z + i), upper half-plane onto the unit disk."""
    z = p.z if isinstance(p, HalfPlanePoint) else complex(p)
    if z.imag <= 0:
        raise DomainError("cayley requires Im z > 0")
    w = (z - 1j) / (z + 1j)
    return DiskPoint(w.real, w.imag)


def cayley_inverse(p: DiskPoint | complex) -> HalfPlanePoint:
    """gamma^{-1}(w) = i (1 + w)/(1 - w)."""
    w = p.w if isinstance(p, DiskPoint) else complex(p)
    if abs(w) >= 1.0:
        raise DomainError("cayley_inverse requires |w| < 1")
    z = 1j * (1 + w) / (1 - w)
    return HalfPlanePoint(z.real, z.imag)


def cayley_deriv(z: complex) -> complex:
    return 2j / (z + 1j) ** 2


def cayley_inverse_deriv(w: complex) -> complex:
    return 2j / (1 - w) ** 2


CAYLEY = "cayley"
HALFPLANE_AUTO = "halfplane-auto"
DISK_AUTO = "disk-auto"


@dataclass(frozen=True)
class MobiusMap:
    """One of the three families; `parameter` is zeta (pole) or w0 (center)."""

    kind: str
    parameter: complex = 0j

    def __post_init__(self):
        if self.kind == HALFPLANE_AUTO and self.parameter.imag <= 0:
            raise DomainError("gamma_zeta needs zeta in the upper half-plane")
        if self.kind == DISK_AUTO and abs(self.parameter) >= 1.0:
            raise DomainError("tau_w0 needs |w0| < 1")
        if self.kind not in (CAYLEY, HALFPLANE_AUTO, DISK_AUTO):
            raise DomainError(f"unknown Mobius kind {self.kind!r}")


def halfplane_auto(zeta: complex) -> MobiusMap:
    return MobiusMap(HALFPLANE_AUTO, complex(zeta))


def disk_auto(w0: complex) -> MobiusMap:
    return MobiusMap(DISK_AUTO, complex(w0))


def mobius_eval_deriv(m: MobiusMap, p) -> tuple[complex, complex]:
    """Value and derivative at p (complex or point type)."""
    z = p.z if isinstance(p, HalfPlanePoint) else (p.w if isinstance(p, DiskPoint) else complex(p))
    if m.kind == CAYLEY:
        return (z - 1j) / (z + 1j), cayley_deriv(z)
    if m.kind == HALFPLANE_AUTO:
        zeta = m.parameter
        den = z - zeta.conjugate()
        return (z - zeta) / den, 2j * zeta.imag / den ** 2
    w0 = m.parameter
    den = 1 - w0.conjugate() * z
    return (z - w0) / den, (1 - abs(w0) ** 2) / den ** 2


def gamma_zeta_abs_deriv(zeta: complex, x, y):
    """|gamma_zeta'| = 2 eta / |z - conj(zeta)|^2 on arrays (the Mobius kernel)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 2.0 * zeta.imag / ((x - zeta.real) ** 2 + (y + zeta.imag) ** 2)


def tau_abs_deriv(w0: complex, u, v):
    """|tau_{w0}'| = (1 - |w0|^2)/|1 - conj(w0) w|^2 on arrays."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    den = (1.0 - (w0.real * u + w0.imag * v)) ** 2 + (w0.imag * u - w0.real * v) ** 2
    return (1.0 - abs(w0) ** 2) / den


def conformal_density_identity(z: HalfPlanePoint, zeta: HalfPlanePoint) -> tuple[float, float]:
    """Both sides of y |gamma_zeta'(z)| = (1 - |gamma_zeta(z)|^2)/2."""
    val, der = mobius_eval_deriv(halfplane_auto(zeta.z), z)
    lhs = z.y * abs(der)
    rhs = 0.5 * (1.0 - abs(val) ** 2)
    return lhs, rhs


def boundary_angle_map(x: float) -> float:
    """theta with gamma(x) = e^{i theta}; continuous branch, theta(0) = pi."""
    return math.pi + 2.0 * math.atan(x)


def boundary_angle_inverse(theta: float) -> float:
    if not 0.0 < theta < 2.0 * math.pi:
        raise DomainError("angle must lie in (0, 2*pi)")
    return math.tan((theta - math.pi) / 2.0)
