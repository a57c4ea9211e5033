"""Bell-operator expectations in the correlation pictures.

Alice holds the local states ``|u+>`` (measurement A0) and ``|u->`` (A1); Bob
holds ``|0>`` (B0) and ``|1>`` (B1).  For a global Hamiltonian ``G`` the
correlators are ``<Bj Ai> = Tr[(|j><j| (x) |u><u|) G]`` and the Bell value is
``S = B0A0 + B0A1 + B1A0 - B1A1``.

Each picture is evaluated twice: once by tracing against an explicit 4x4
Hamiltonian (or, for the probability-based classical pictures, from the
outcome eigenvalues), once from the closed-form decomposition
``constant + shift + deviation``.  Disagreement raises
:class:`~dilation_lab.errors.InternalInconsistency`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import tolerances
from .dilation import ZERO, Perturbation, build_general_dilation
from .errors import InternalInconsistency, InvalidProbability, NonOrthonormalBasis
from .numerics import EigenDecomposition, check_hermitian, general_eig2, herm_eig, scale_of
from .pt_model import LocalState, PTParams, make_pt_hamiltonian
from .spectra import spectral_data


class Picture(enum.Enum):
    SIMULATION = "simulation"
    CLASSICAL = "classical"
    CLASSICAL_BIASED = "classical_biased"
    LOCAL_HERMITIAN = "local_hermitian"
    GENUINE_LOCAL_HERMITIAN = "genuine_local_hermitian"


@dataclass(frozen=True)
class PictureResult:
    picture: Picture
    value: float
    constant_part: float
    shift: float
    deviation: float
    bound: float
    trace_value: float

    def row(self) -> dict:
        return {
            "picture": self.picture.value,
            "value": self.value,
            "constant": self.constant_part,
            "shift": self.shift,
            "deviation": self.deviation,
            "bound": self.bound,
        }


@dataclass(frozen=True)
class Probabilities:
    """Outcome probabilities for H (``p``), (Hperp)' (``pp``) and H4' (``ppp``)."""

    p_plus: float = 0.5
    p_minus: float = 0.5
    pp_plus: float = 0.5
    pp_minus: float = 0.5
    ppp_plus: float = 0.5
    ppp_minus: float = 0.5

    def __post_init__(self):
        tol = tolerances().hermiticity
        pairs = [("p", self.p_plus, self.p_minus), ("pp", self.pp_plus, self.pp_minus), ("ppp", self.ppp_plus, self.ppp_minus)]
        for name, hi, lo in pairs:
            for x in (hi, lo):
                if not (-tol <= x <= 1.0 + tol):
                    raise InvalidProbability(f"{name} probability {x!r} outside [0, 1]")
            if abs(hi + lo - 1.0) > tol:
                raise InvalidProbability(f"{name}_plus + {name}_minus = {hi + lo!r}, expected 1")

    @classmethod
    def from_plus(cls, p_plus: float, pp_plus: float = 0.5, ppp_plus: float = 0.5) -> "Probabilities":
        return cls(p_plus, 1.0 - p_plus, pp_plus, 1.0 - pp_plus, ppp_plus, 1.0 - ppp_plus)


@dataclass(frozen=True)
class GenuineAngles:
    """Bloch-style angles: basis tilt ``delta``, state phase ``Delta``,
    basis phase ``Delta_prime`` and state polar angle ``alpha_state``."""

    delta: float = 0.0
    Delta: float = 0.0
    Delta_prime: float = 0.0
    alpha_state: float = 0.0

    def __post_init__(self):
        for name in ("delta", "Delta", "Delta_prime", "alpha_state"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def state(self) -> LocalState:
        return LocalState.from_angles(self.alpha_state, self.Delta)

    def bases(self) -> tuple["Basis", "Basis"]:
        return Basis.computational(), Basis.rotated(self.delta, self.Delta_prime)


@dataclass(frozen=True)
class Basis:
    """An orthonormal pair; ``plus`` carries the eigenvalue labelled ``+``."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        tol = tolerances().normalization * 100
        gram = np.array(
            [[np.vdot(x, y) for y in (self.plus, self.minus)] for x in (self.plus, self.minus)]
        )
        err = float(np.max(np.abs(gram - np.eye(2))))
        if err > tol:
            raise NonOrthonormalBasis(f"basis Gram matrix deviates from identity by {err:.3e}")
        self.plus.setflags(write=False)
        self.minus.setflags(write=False)

    @classmethod
    def from_vectors(cls, plus, minus) -> "Basis":
        return cls(np.asarray(plus, dtype=complex).ravel(), np.asarray(minus, dtype=complex).ravel())

    @classmethod
    def computational(cls) -> "Basis":
        return cls.from_vectors([1, 0], [0, 1])

    @classmethod
    def rotated(cls, delta: float, phase: float = 0.0) -> "Basis":
        e = np.exp(1j * phase)
        return cls.from_vectors([math.cos(delta), e * math.sin(delta)], [-math.sin(delta), e * math.cos(delta)])

    @classmethod
    def from_eig(cls, eig: EigenDecomposition) -> "Basis":
        """Higher eigenvalue's vector becomes ``plus``."""
        return cls.from_vectors(eig.vector(1), eig.vector(0))

    def cos2delta(self, other: "Basis") -> float:
        """``cos 2delta`` with ``cos delta = |<s+|s'+>|``."""
        return 2.0 * abs(np.vdot(self.plus, other.plus)) ** 2 - 1.0

    def prob_plus(self, u: LocalState) -> float:
        return float(abs(np.vdot(u.plus, self.plus)) ** 2)


def _as_basis(b) -> Basis:
    if isinstance(b, Basis):
        return b
    if isinstance(b, EigenDecomposition):
        return Basis.from_eig(b)
    raise NonOrthonormalBasis(f"cannot interpret {type(b).__name__} as a basis")


class Correlators(NamedTuple):
    b0a0: float
    b1a0: float
    b0a1: float
    b1a1: float

    @property
    def bell(self) -> float:
        return self.b0a0 + self.b0a1 + self.b1a0 - self.b1a1


def correlators(g, u: LocalState) -> Correlators:
    """The four ``<Bj Ai>`` in the order ``B0A0, B1A0, B0A1, B1A1``."""
    g = check_hermitian(g)
    if g.shape != (4, 4):
        raise ValueError(f"correlators need a 4x4 Hamiltonian, got {g.shape}")
    tol = tolerances().imaginary_residual * scale_of(g)
    out = []
    for state in (u.plus, u.minus):
        for j in (0, 1):
            phi = np.kron(np.eye(2)[j], state)
            val = np.vdot(phi, g @ phi)
            if abs(val.imag) > tol:
                raise InternalInconsistency(f"correlator has imaginary part {val.imag:.3e}")
            out.append(float(val.real))
    return Correlators(*out)


def _h_eigs(p: PTParams) -> tuple[float, float]:
    """``(lambda+, lambda-)`` labelled so that ``lambda+ = E0 + s cos(alpha)``."""
    half = p.s * math.cos(p.alpha)
    return p.E0 + half, p.E0 - half


def _perp_eigs_numeric(p: PTParams, pert: Perturbation) -> tuple[float, float]:
    """``(lambda'+, lambda'-)`` read off the Hermitian spectrum of ``Hhat'``.

    The dilation's spectrum is ``{lambda+-} U {lambda'+-}``; removing the
    eigenvalues nearest to ``lambda+-`` leaves those of ``(Hperp)'``.  This is
    well conditioned even where the non-normal ``(Hperp)'`` is nearly defective.
    """
    vals = list(herm_eig(build_general_dilation(p, pert).assembled).eigenvalues)
    for target in _h_eigs(p):
        vals.pop(min(range(len(vals)), key=lambda k: abs(vals[k] - target)))
    lo, hi = sorted(vals)
    return float(hi), float(lo)


def local_hamiltonian_h(p: PTParams, basis: Basis) -> np.ndarray:
    lp, lm = _h_eigs(p)
    return lp * np.outer(basis.plus, basis.plus.conj()) + lm * np.outer(basis.minus, basis.minus.conj())


def local_hamiltonian_perp(p: PTParams, pert: Perturbation, basis_p: Basis) -> np.ndarray:
    lp, lm = _perp_eigs_numeric(p, pert)
    return lp * np.outer(basis_p.plus, basis_p.plus.conj()) + lm * np.outer(basis_p.minus, basis_p.minus.conj())


def local_hermitian_hamiltonian(p: PTParams, pert: Perturbation, basis_p: Basis, basis: Basis | None = None) -> np.ndarray:
    """``|0><0| (x) H_h + |1><1| (x) (Hperp)'_h``."""
    basis = Basis.computational() if basis is None else basis
    z = np.zeros((2, 2), dtype=complex)
    return np.block([[local_hamiltonian_h(p, basis), z], [z, local_hamiltonian_perp(p, pert, basis_p)]])


def genuine_hamiltonian(p: PTParams, pert: Perturbation, basis: Basis, basis_p: Basis) -> np.ndarray:
    """``(1/2) I (x) (H_h + (Hperp)'_h)``."""
    return 0.5 * np.kron(np.eye(2), local_hamiltonian_h(p, basis) + local_hamiltonian_perp(p, pert, basis_p))


def _agree(picture: Picture, a: float, b: float, scale: float) -> None:
    if abs(a - b) > tolerances().dual_path * scale:
        raise InternalInconsistency(f"{picture.value}: independent routes disagree ({a!r} vs {b!r})")


def _result(picture, constant, shift, deviation, bound, trace_value, scale) -> PictureResult:
    value = constant + shift + deviation
    _agree(picture, value, trace_value, scale)
    return PictureResult(picture, value, constant, shift, deviation, bound, trace_value)


def h4_basis(p: PTParams, pert: Perturbation = ZERO) -> Basis:
    """Eigenbasis of ``H4'`` (``plus`` = larger eigenvalue)."""
    return Basis.from_eig(herm_eig(build_general_dilation(p, pert).H4))


def simulation_explicit(p: PTParams, pert: Perturbation, u: LocalState) -> float:
    """Fully expanded simulation value in terms of ``u, v`` and ``(a, b, c, d)``."""
    a, b, c, d = pert.a, pert.b, pert.c, pert.d
    sa, ca = math.sin(p.alpha), math.cos(p.alpha)
    k = (b + b * sa * sa + 2.0 * a * sa) / (ca * ca)
    uv = np.conj(u.u) * u.v
    val = (
        2.0 * p.E0
        + 2.0 * a
        + (uv + np.conj(uv)) * (p.omega0 * ca + 2.0 * d)
        + uv * 2j * k
        - np.conj(uv) * 2j * k
        + 2.0 * c * (abs(u.u) ** 2 - abs(u.v) ** 2)
    )
    return float(np.real(val))


def bell_simulation(p: PTParams, pert: Perturbation, u: LocalState) -> PictureResult:
    """Trace against the dilated ``Hhat'``; closed form ``2E0 + 2a + w''(p''+ - p''-)``."""
    d = build_general_dilation(p, pert)
    scale = scale_of(d.assembled)
    trace = correlators(d.assembled, u).bell
    sd = spectral_data(p, pert)
    pp = h4_basis(p, pert).prob_plus(u)
    dev = sd.omega0_pp * (2.0 * pp - 1.0)
    res = _result(Picture.SIMULATION, 2.0 * p.E0, 2.0 * pert.a, dev, sd.omega0_pp, trace, scale)
    _agree(Picture.SIMULATION, res.value, simulation_explicit(p, pert, u), scale)
    return res


def bell_classical(p: PTParams, pert: Perturbation, probs: Probabilities) -> PictureResult:
    """Alice cannot tell A0 from A1: average of the two orderings."""
    sd = spectral_data(p, pert)
    lp, lm = _h_eigs(p)
    lpp, lpm = _perp_eigs_numeric(p, pert)
    outcome_route = lp * probs.p_plus + lm * probs.p_minus + lpp * probs.pp_plus + lpm * probs.pp_minus
    dev = 0.5 * (sd.omega0 * (probs.p_plus - probs.p_minus) + sd.omega0_p * (probs.pp_plus - probs.pp_minus))
    bound = 0.5 * (sd.omega0_p + abs(sd.omega0))
    scale = max(1.0, abs(p.E0), abs(sd.E0_prime), sd.omega0_p, abs(sd.omega0))
    return _result(Picture.CLASSICAL, p.E0 + sd.E0_prime, 0.0, dev, bound, outcome_route, scale)


def bell_classical_biased(p: PTParams, probs: Probabilities) -> PictureResult:
    """Value seen when Alice knows which measurement is A0; blind to ``(Hperp)'``."""
    omega0 = p.omega0
    lp, lm = (float(z.real) for z in reversed(general_eig2(make_pt_hamiltonian(p))))
    if omega0 < 0:
        lp, lm = lm, lp
    outcome_route = 2.0 * (lp * probs.p_plus + lm * probs.p_minus)
    dev = omega0 * (probs.p_plus - probs.p_minus)
    scale = max(1.0, abs(p.E0), abs(omega0))
    return _result(Picture.CLASSICAL_BIASED, 2.0 * p.E0, 0.0, dev, abs(omega0), outcome_route, scale)


def bell_local_hermitian(p: PTParams, pert: Perturbation, u: LocalState, basis_p) -> PictureResult:
    """Block-diagonal ``Hhat'_l``; closed form ``2E0 + w'(p'+ - p'-)``."""
    basis_p = _as_basis(basis_p)
    g = local_hermitian_hamiltonian(p, pert, basis_p)
    trace = correlators(g, u).bell
    sd = spectral_data(p, pert)
    dev = sd.omega0_p * (2.0 * basis_p.prob_plus(u) - 1.0)
    return _result(Picture.LOCAL_HERMITIAN, 2.0 * p.E0, 0.0, dev, sd.omega0_p, trace, scale_of(g))


def genuine_bound(omega0: float, omega0_p: float, cos2delta: float) -> float:
    radicand = 0.25 * omega0**2 + 0.25 * omega0_p**2 + 0.5 * omega0 * omega0_p * cos2delta
    return math.sqrt(max(radicand, 0.0))


def bell_genuine_local(p: PTParams, pert: Perturbation, u: LocalState, basis, basis_p) -> PictureResult:
    """Tensor-product ``Hhat'_g``; same closed form as the classical picture."""
    basis, basis_p = _as_basis(basis), _as_basis(basis_p)
    g = genuine_hamiltonian(p, pert, basis, basis_p)
    trace = correlators(g, u).bell
    sd = spectral_data(p, pert)
    p1 = basis.prob_plus(u)
    p2 = basis_p.prob_plus(u)
    dev = 0.5 * (sd.omega0 * (2.0 * p1 - 1.0) + sd.omega0_p * (2.0 * p2 - 1.0))
    bound = genuine_bound(sd.omega0, sd.omega0_p, basis.cos2delta(basis_p))
    return _result(Picture.GENUINE_LOCAL_HERMITIAN, p.E0 + sd.E0_prime, 0.0, dev, bound, trace, scale_of(g))


def state_probabilities(p: PTParams, pert: Perturbation, u: LocalState, basis, basis_p) -> Probabilities:
    """``p`` from ``basis``, ``p'`` from ``basis_p``, ``p''`` from the eigenbasis of ``H4'``."""
    p1 = _as_basis(basis).prob_plus(u)
    p2 = _as_basis(basis_p).prob_plus(u)
    p3 = h4_basis(p, pert).prob_plus(u)
    return Probabilities.from_plus(min(max(p1, 0.0), 1.0), min(max(p2, 0.0), 1.0), min(max(p3, 0.0), 1.0))


def all_pictures(p: PTParams, pert: Perturbation, u: LocalState, basis, basis_p) -> list[PictureResult]:
    probs = state_probabilities(p, pert, u, basis, basis_p)
    return [
        bell_simulation(p, pert, u),
        bell_classical(p, pert, probs),
        bell_classical_biased(p, probs),
        bell_local_hermitian(p, pert, u, basis_p),
        bell_genuine_local(p, pert, u, basis, basis_p),
    ]


# ---------------------------------------------------------------------------
# saturation scans


@dataclass(frozen=True)
class ScanReport:
    picture: Picture
    max_abs_deviation: float
    bound: float
    ratio: float
    theta: float
    phi: float
    grid: int

    @property
    def within_bound(self) -> bool:
        return self.max_abs_deviation <= self.bound + tolerances().bound_slack * max(1.0, self.bound)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _overlap2(theta, phi, vec: np.ndarray):
    """``|<u+|s>|^2`` for ``u+ = (cos theta, e^{i phi} sin theta)``."""
    return np.abs(np.cos(theta) * vec[0] + np.exp(-1j * phi) * np.sin(theta) * vec[1]) ** 2


def _deviation_fn(picture: Picture, p: PTParams, pert: Perturbation, basis: Basis, basis_p: Basis):
    sd = spectral_data(p, pert)
    if picture is Picture.SIMULATION:
        s2 = h4_basis(p, pert).plus
        return (lambda th, ph: sd.omega0_pp * (2.0 * _overlap2(th, ph, s2) - 1.0)), sd.omega0_pp
    if picture is Picture.LOCAL_HERMITIAN:
        return (lambda th, ph: sd.omega0_p * (2.0 * _overlap2(th, ph, basis_p.plus) - 1.0)), sd.omega0_p
    if picture is Picture.GENUINE_LOCAL_HERMITIAN:
        bound = genuine_bound(sd.omega0, sd.omega0_p, basis.cos2delta(basis_p))

        def dev(th, ph):
            return 0.5 * (
                sd.omega0 * (2.0 * _overlap2(th, ph, basis.plus) - 1.0)
                + sd.omega0_p * (2.0 * _overlap2(th, ph, basis_p.plus) - 1.0)
            )

        return dev, bound
    raise ValueError(f"no state scan for picture {picture.value}")


def _check_scan(rep: ScanReport) -> ScanReport:
    if not rep.within_bound:
        raise InternalInconsistency(
            f"{rep.picture.value}: |deviation| {rep.max_abs_deviation!r} exceeds bound {rep.bound!r}"
        )
    return rep


def saturation_scan(
    p: PTParams,
    pert: Perturbation,
    picture: Picture | str,
    grid: int = 256,
    basis: Basis | None = None,
    basis_p: Basis | None = None,
) -> ScanReport:
    """Maximise ``|deviation|`` over Alice's state and compare with the bound.

    State pictures are scanned on a ``grid x grid`` mesh of
    ``u+ = (cos theta, e^{i phi} sin theta)``, theta in [0, pi/2], phi in
    [0, 2 pi), followed by one golden-section pass per coordinate.  Ties take
    the lexicographically smallest grid index.  The classical pictures are
    linear in the probabilities, so their extreme points are enumerated.
    """
    picture = Picture(picture)
    if grid < 64:
        raise ValueError("grid must have at least 64 points per angle")
    basis = Basis.computational() if basis is None else basis
    basis_p = Basis.computational() if basis_p is None else basis_p

    if picture in (Picture.CLASSICAL, Picture.CLASSICAL_BIASED):
        best, bound = -1.0, 0.0
        for p_plus in (0.0, 1.0):
            for pp_plus in (0.0, 1.0):
                probs = Probabilities.from_plus(p_plus, pp_plus)
                r = bell_classical(p, pert, probs) if picture is Picture.CLASSICAL else bell_classical_biased(p, probs)
                best, bound = max(best, abs(r.deviation)), r.bound
        ratio = best / bound if bound > 0 else 1.0
        return _check_scan(ScanReport(picture, best, bound, ratio, float("nan"), float("nan"), grid))

    dev, bound = _deviation_fn(picture, p, pert, basis, basis_p)
    thetas = np.linspace(0.0, 0.5 * math.pi, grid)
    phis = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    values = np.abs(dev(thetas[:, None], phis[None, :]))
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    th, ph, best = float(thetas[i]), float(phis[j]), float(values[i, j])

    dth = thetas[1] - thetas[0]
    dph = phis[1] - phis[0]
    th_new, val = _golden_max(lambda x: float(abs(dev(x, ph))), max(0.0, th - dth), min(0.5 * math.pi, th + dth))
    if val > best:
        th, best = th_new, val
    ph_new, val = _golden_max(lambda x: float(abs(dev(th, x))), ph - dph, ph + dph)
    if val > best:
        ph, best = ph_new, val

    # confirm the optimum through the full dual-route evaluation
    u = LocalState.from_angles(th, ph)
    if picture is Picture.SIMULATION:
        r = bell_simulation(p, pert, u)
    elif picture is Picture.LOCAL_HERMITIAN:
        r = bell_local_hermitian(p, pert, u, basis_p)
    else:
        r = bell_genuine_local(p, pert, u, basis, basis_p)
    if abs(abs(r.deviation) - best) > tolerances().dual_path * max(1.0, bound):
        raise InternalInconsistency(f"{picture.value}: scan optimum not reproduced by the picture evaluation")

    ratio = best / bound if bound > 0 else 1.0
    return _check_scan(ScanReport(picture, best, bound, ratio, float(th), float(ph), grid))
