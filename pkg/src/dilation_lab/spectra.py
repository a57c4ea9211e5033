"""Closed-form spectra of ``(Hperp)'`` and ``H4'`` for the 2-D model.

Both matrices have the shape ``(E + A) I + [[C1, C2 + iA2], [C2 - iA2, -C1]]``
so their eigenvalues are ``E + A +/- sqrt(C1^2 + C2^2 + A2^2)``.  For
``(Hperp)'`` the coefficients ``C1, C2`` are complex but the imaginary parts of
``C1^2 + C2^2`` cancel; the gap is evaluated from the manifestly non-negative
sum of squares and the complex route is kept as a consistency check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import tolerances
from .dilation import ZERO, Perturbation
from .errors import InternalInconsistency
from .pt_model import PTParams, pt_eigenvalues


@dataclass(frozen=True)
class CoefficientSet:
    A1: float
    A2: float
    C1: complex
    C2: complex
    A1p: float
    A2p: float
    C1p: float
    C2p: float

    @property
    def perp_discriminant(self) -> complex:
        return self.C1**2 + self.C2**2 + self.A2**2

    @property
    def h4_discriminant(self) -> float:
        return self.C1p**2 + self.C2p**2 + self.A2p**2


def coefficients(p: PTParams, pert: Perturbation = ZERO) -> CoefficientSet:
    p.validate()
    a, b, c, d = pert.a, pert.b, pert.c, pert.d
    s = p.s
    sa, ca = math.sin(p.alpha), math.cos(p.alpha)
    c2 = ca * ca
    return CoefficientSet(
        A1=2.0 * (a + b * sa) / c2,
        A2=2.0 * (b + a * sa) / c2,
        C1=(2.0 * c + 2j * d * sa) / c2 + 1j * s * sa,
        C2=(2.0 * d - 2j * c * sa) / c2 + s,
        A1p=(a + 2.0 * b * sa + a * sa * sa) / c2,
        A2p=(b + b * sa * sa + 2.0 * a * sa) / c2,
        C1p=c,
        C2p=s * c2 + d,
    )


def omega0_perp(p: PTParams, pert: Perturbation = ZERO) -> float:
    """Gap of ``(Hperp)'`` as a sum of squares (no cancellation)."""
    a, b, c, d = pert.a, pert.b, pert.c, pert.d
    sa, ca = math.sin(p.alpha), math.cos(p.alpha)
    c2 = ca * ca
    return 2.0 * math.sqrt((p.s + 2.0 * d / c2) ** 2 * c2 + 4.0 * c * c / c2 + 4.0 * (b + a * sa) ** 2 / (c2 * c2))


def omega0_h4(p: PTParams, pert: Perturbation = ZERO) -> float:
    """Gap of ``H4'``."""
    a, b, c, d = pert.a, pert.b, pert.c, pert.d
    sa, ca = math.sin(p.alpha), math.cos(p.alpha)
    c2 = ca * ca
    return 2.0 * math.sqrt((p.s * c2 + d) ** 2 + (b + b * sa * sa + 2.0 * a * sa) ** 2 / (c2 * c2) + c * c)


@dataclass(frozen=True)
class SpectralData:
    lambda_minus: float
    lambda_plus: float
    lambda_p_minus: float
    lambda_p_plus: float
    lambda_pp_minus: float
    lambda_pp_plus: float
    omega0: float
    omega0_p: float
    omega0_pp: float
    E0_prime: float

    FIELDS = (
        "lambda_minus",
        "lambda_plus",
        "lambda_p_minus",
        "lambda_p_plus",
        "lambda_pp_minus",
        "lambda_pp_plus",
        "omega0",
        "omega0_p",
        "omega0_pp",
        "E0_prime",
    )

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.FIELDS}


def spectral_data(p: PTParams, pert: Perturbation = ZERO) -> SpectralData:
    tol = tolerances()
    co = coefficients(p, pert)
    disc = co.perp_discriminant
    scale = max(1.0, abs(co.C1), abs(co.C2), abs(co.A2)) ** 2
    if abs(disc.imag) > tol.imaginary_residual * scale:
        raise InternalInconsistency(f"C1^2 + C2^2 + A2^2 has imaginary part {disc.imag:.3e}")

    w_p = omega0_perp(p, pert)
    if abs(disc.real - 0.25 * w_p * w_p) > tol.imaginary_residual * scale:
        raise InternalInconsistency("complex and real forms of the (Hperp)' gap disagree")
    w_pp = 2.0 * math.sqrt(co.h4_discriminant)

    lo, hi = pt_eigenvalues(p)
    e0p = p.E0 + co.A1
    e4 = p.E0 + co.A1p
    return SpectralData(
        lambda_minus=lo,
        lambda_plus=hi,
        lambda_p_minus=e0p - 0.5 * w_p,
        lambda_p_plus=e0p + 0.5 * w_p,
        lambda_pp_minus=e4 - 0.5 * w_pp,
        lambda_pp_plus=e4 + 0.5 * w_pp,
        omega0=p.omega0,
        omega0_p=w_p,
        omega0_pp=w_pp,
        E0_prime=e0p,
    )
