"""Telling a general dilation apart from its local-Hermitian stand-ins.

Against ``Hhat'_l`` an observer compares simulation and local-Hermitian Bell
values: a shift ``2a`` or a different deviation bound (``w''`` vs ``w'``)
gives the dilation away.  Against ``Hhat'_g`` a spectral mismatch is visible
directly; with matching spectra the same shift/bound logic applies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .config import tolerances
from .dilation import Perturbation
from .errors import ConstraintViolated, InternalInconsistency
from .pt_model import PTParams
from .spectra import spectral_data


class LocalVerdict(enum.Enum):
    BY_ENERGY_SHIFT = "by_energy_shift"
    BY_BOUND_GAP = "by_bound_gap"
    INDISTINGUISHABLE = "indistinguishable"


class GenuineVerdict(enum.Enum):
    BY_SPECTRUM = "by_spectrum"
    BY_ENERGY_SHIFT = "by_energy_shift"
    BY_BOUND_GAP = "by_bound_gap"
    # only reachable for Hermitian H (sin(alpha) = 0) with a vanishing perturbation
    INDISTINGUISHABLE = "indistinguishable"


@dataclass(frozen=True)
class DistinguishReport:
    vs_local: LocalVerdict
    vs_genuine: GenuineVerdict
    shift: float
    omega0_p: float
    omega0_pp: float
    same_eigenvalues: bool
    notes: str

    def as_dict(self) -> dict:
        return {
            "vs_local": self.vs_local.value,
            "vs_genuine": self.vs_genuine.value,
            "shift": self.shift,
            "omega0_p": self.omega0_p,
            "omega0_pp": self.omega0_pp,
            "same_eigenvalues": self.same_eigenvalues,
            "notes": self.notes,
        }


def _energy_tol(p: PTParams) -> float:
    return tolerances().decision * max(1.0, abs(p.E0), abs(p.s))


@dataclass(frozen=True)
class ConstraintSolution:
    c_squared: float
    scale: float = 1.0

    @property
    def feasible(self) -> bool:
        # endpoints of the feasible d-interval give c^2 = 0 up to rounding
        return self.c_squared >= -tolerances().constraint * self.scale

    @property
    def c(self) -> float:
        if not self.feasible:
            raise ValueError("no real c satisfies the same-eigenvalue constraint")
        return math.sqrt(max(self.c_squared, 0.0))


def same_eigenvalue_constraint(p: PTParams, b: float = 0.0, d: float = 0.0) -> ConstraintSolution:
    """``c^2`` that makes ``(Hperp)'`` isospectral with ``H``.

    Equal means force ``a = -b sin(alpha)``; equal gaps then give
    ``c^2 = cos^2/4 [s^2 cos^2 - (s + 2d/cos^2)^2 cos^2 - 4 b^2]``.  The
    ``b^2`` term vanishes on the ``a = b = 0`` branch.
    """
    p.validate()
    c2 = math.cos(p.alpha) ** 2
    s = p.s
    val = 0.25 * c2 * (s * s * c2 - (s + 2.0 * d / c2) ** 2 * c2 - 4.0 * b * b)
    return ConstraintSolution(val, max(1.0, s * s, d * d, b * b))


def constraint_perturbation(p: PTParams, d: float, b: float = 0.0, c_sign: float = 1.0) -> Perturbation:
    """A perturbation on the same-eigenvalue manifold for the given ``(b, d)``."""
    sol = same_eigenvalue_constraint(p, b, d)
    return Perturbation(a=-b * math.sin(p.alpha), b=b, c=math.copysign(sol.c, c_sign), d=d)


def feasible_d_range(p: PTParams) -> tuple[float, float]:
    """Closed interval of ``d`` with ``-d s >= d^2 / cos^2`` (``b = 0``)."""
    c2 = math.cos(p.alpha) ** 2
    end = -p.s * c2
    return (min(0.0, end), max(0.0, end))


def gap_same_eigenvalue(p: PTParams, pert: Perturbation) -> float:
    """``(w')^2 - (w'')^2 = 4 (s^2 cos^2 sin^2 - d s cos^2)`` on ``a = b = 0``.

    Raises
    ------
    ConstraintViolated
        If ``pert`` is not on the ``a = b = 0`` same-eigenvalue manifold.
    """
    tol = tolerances().constraint
    scale = max(1.0, abs(p.s)) ** 2
    if abs(pert.a) > tol or abs(pert.b) > tol:
        raise ConstraintViolated(f"expected a = b = 0, got a={pert.a!r}, b={pert.b!r}")
    sol = same_eigenvalue_constraint(p, 0.0, pert.d)
    if abs(pert.c**2 - sol.c_squared) > tol * scale:
        raise ConstraintViolated(f"c^2 = {pert.c**2!r} but the constraint requires {sol.c_squared!r}")
    sa, ca = math.sin(p.alpha), math.cos(p.alpha)
    c2 = ca * ca
    gap = 4.0 * (p.s**2 * c2 * sa * sa - pert.d * p.s * c2)
    floor = 4.0 * (p.s**2 * c2 * sa * sa + pert.d**2)
    if gap < floor - tol * scale:
        raise InternalInconsistency(f"gap {gap!r} below its lower bound {floor!r}")
    return gap


def indistinguishable_d(p: PTParams) -> float:
    """``d = s (cos^2 - cos^3) / (cos - 2)``: with ``a = b = c = 0`` both bounds coincide."""
    p.validate()
    x = math.cos(p.alpha)
    return p.s * (x * x - x**3) / (x - 2.0)


def classify(p: PTParams, pert: Perturbation) -> DistinguishReport:
    sd = spectral_data(p, pert)
    tol = _energy_tol(p)
    shift = 2.0 * pert.a
    bound_gap = sd.omega0_p - sd.omega0_pp
    same = abs(sd.lambda_p_minus - sd.lambda_minus) <= tol and abs(sd.lambda_p_plus - sd.lambda_plus) <= tol

    notes = []
    if abs(shift) > tol:
        vs_local = LocalVerdict.BY_ENERGY_SHIFT
        notes.append(f"simulation value carries an energy shift 2a = {shift:.6g}")
    elif abs(bound_gap) > tol:
        vs_local = LocalVerdict.BY_BOUND_GAP
        notes.append(f"deviation bounds differ: w' - w'' = {bound_gap:.6g}")
    else:
        vs_local = LocalVerdict.INDISTINGUISHABLE
        notes.append("no shift and equal bounds: simulation and local-Hermitian pictures coincide")

    if not same:
        vs_genuine = GenuineVerdict.BY_SPECTRUM
        notes.append("dilation spectrum differs from the doubled spectrum of H: measure energies")
    elif abs(shift) > tol:
        vs_genuine = GenuineVerdict.BY_ENERGY_SHIFT
    elif abs(abs(sd.omega0) - sd.omega0_pp) > tol:
        vs_genuine = GenuineVerdict.BY_BOUND_GAP
    else:
        vs_genuine = GenuineVerdict.INDISTINGUISHABLE
        notes.append("Hermitian limit: the dilation is a product I (x) H")

    return DistinguishReport(
        vs_local=vs_local,
        vs_genuine=vs_genuine,
        shift=shift,
        omega0_p=sd.omega0_p,
        omega0_pp=sd.omega0_pp,
        same_eigenvalues=same,
        notes="; ".join(notes),
    )
