"""Hermitian dilations of a PT-symmetric Hamiltonian.

A dilation is a Hermitian block matrix ``[[H1, H2], [H2^dagger, H4]]`` that
maps ``psi (+) tau psi`` to ``H psi (+) tau H psi``.  The same matrix maps
``-tau psi (+) psi`` to ``-tau Hperp psi (+) Hperp psi`` with
``Hperp = -H2^dagger tau + H4``, so its spectrum is that of ``H`` together
with that of ``Hperp``.

The special (two-fold) dilation uses ``H4 = H1``; general ones are obtained
by adding a Hermitian ``H1'' = [[a + c, d + ib], [d - ib, a - c]]`` to ``H1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import tolerances
from .errors import MetricMismatch
from .numerics import as_cmatrix, dagger, general_eig2, hermiticity_residual, inverse2, max_abs, scale_of
from .pt_model import MetricTau, PTParams, intertwining_residual, make_pt_hamiltonian, make_tau


@dataclass(frozen=True)
class Perturbation:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"perturbation component {name} must be finite")

    @property
    def matrix(self) -> np.ndarray:
        """The Hermitian block ``H1''`` added to ``H1``."""
        a, b, c, d = self.a, self.b, self.c, self.d
        return np.array([[a + c, d + 1j * b], [d - 1j * b, a - c]], dtype=complex)

    def norm(self) -> float:
        return math.sqrt(self.a**2 + self.b**2 + self.c**2 + self.d**2)

    def scaled(self, k: float) -> "Perturbation":
        return Perturbation(k * self.a, k * self.b, k * self.c, k * self.d)


ZERO = Perturbation()


class DilationKind(enum.Enum):
    SPECIAL = "special"
    GENERAL = "general"


@dataclass(frozen=True)
class DilatedHamiltonian:
    H: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    H4: np.ndarray
    assembled: np.ndarray
    tau: MetricTau
    kind: DilationKind

    @classmethod
    def from_blocks(cls, H, H1, H2, H4, tau: MetricTau, kind: DilationKind) -> "DilatedHamiltonian":
        H, H1, H2, H4 = (as_cmatrix(m) for m in (H, H1, H2, H4))
        full = np.block([[H1, H2], [dagger(H2), H4]])
        for m in (H, H1, H2, H4, full):
            m.setflags(write=False)
        return cls(H, H1, H2, H4, full, tau, kind)

    @property
    def dim(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True)
class PerpHamiltonian:
    matrix: np.ndarray

    def eigenvalues(self) -> tuple[complex, complex]:
        return general_eig2(self.matrix)


def _inv(m: np.ndarray) -> np.ndarray:
    return inverse2(m) if m.shape == (2, 2) else np.linalg.inv(m)


def _check_metric(h: np.ndarray, tau: MetricTau) -> None:
    resid = intertwining_residual(h, tau)
    limit = tolerances().metric_mismatch * scale_of(h) * scale_of(tau.eta)
    if resid > limit:
        raise MetricMismatch(f"H^dagger(I+tau^2) != (I+tau^2)H: residual {resid:.3e}")


def build_special_dilation(h, tau: MetricTau) -> DilatedHamiltonian:
    """Two-fold dilation ``I (x) H1 + i sigma_y (x) H2``."""
    h = as_cmatrix(h)
    _check_metric(h, tau)
    t = tau.matrix
    ti = _inv(t)
    w = _inv(ti + t)
    h1 = (h @ ti + t @ h) @ w
    h2 = (h - t @ h @ ti) @ w
    return DilatedHamiltonian.from_blocks(h, h1, h2, h1, tau, DilationKind.SPECIAL)


def dilation_from_h1(h, tau: MetricTau, h1, *, check_metric: bool = True) -> DilatedHamiltonian:
    """Dilation fixed by an arbitrary Hermitian upper-left block ``H1``.

    ``H2 = (H - H1) tau^-1`` and ``H4 = (tau H - H2^dagger) tau^-1``; ``H4`` is
    Hermitian exactly when ``(H, tau)`` satisfy the intertwining condition.
    ``check_metric=False`` skips that precondition so the failure mode can be
    inspected; the assembled matrix then uses ``H4`` as computed.
    """
    h, h1 = as_cmatrix(h), as_cmatrix(h1)
    if check_metric:
        _check_metric(h, tau)
    t = tau.matrix
    ti = _inv(t)
    h2 = (h - h1) @ ti
    h4 = (t @ h - dagger(h2)) @ ti
    return DilatedHamiltonian.from_blocks(h, h1, h2, h4, tau, DilationKind.GENERAL)


def build_general_dilation(p: PTParams, pert: Perturbation = ZERO) -> DilatedHamiltonian:
    """Special dilation of the 2-D model shifted by ``H1''`` from ``pert``.

    The blocks are formed additively (``H2 - H1'' tau^-1`` and
    ``H1 + tau^-1 H1'' tau^-1``) so a zero perturbation returns the special
    blocks bit for bit.
    """
    special = build_special_dilation(make_pt_hamiltonian(p), make_tau(p))
    t = special.tau.matrix
    ti = inverse2(t)
    hpp = pert.matrix
    h1 = special.H1 + hpp
    h2 = special.H2 - hpp @ ti
    h4 = special.H1 + ti @ hpp @ ti
    return DilatedHamiltonian.from_blocks(special.H, h1, h2, h4, special.tau, DilationKind.GENERAL)


def compute_perp(d: DilatedHamiltonian) -> PerpHamiltonian:
    """``Hperp = -H2^dagger tau + H4``."""
    return PerpHamiltonian(-dagger(d.H2) @ d.tau.matrix + d.H4)


def perp_closed_form(p: PTParams, pert: Perturbation = ZERO) -> PerpHamiltonian:
    """``(Hperp)' = H + tau^-1 H1'' (tau + tau^-1)`` for the 2-D model."""
    h = make_pt_hamiltonian(p)
    t = make_tau(p).matrix
    ti = inverse2(t)
    return PerpHamiltonian(h + ti @ pert.matrix @ (t + ti))


@dataclass(frozen=True)
class DilationResiduals:
    eq_forward: float
    eq_perp: float
    hermiticity: float
    h4_hermiticity: float
    trials: int
    seed: int

    @property
    def max_block_residual(self) -> float:
        return max(self.eq_forward, self.eq_perp)


def verify_dilation(d: DilatedHamiltonian, trials: int = 50, seed: int = 0) -> DilationResiduals:
    """Largest residual of both block identities over random normalised ``psi``.

    Checks ``Hhat (psi (+) tau psi) = H psi (+) tau H psi`` and
    ``Hhat (-tau psi (+) psi) = -tau Hperp psi (+) Hperp psi``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    n = d.dim
    t = d.tau.matrix
    perp = compute_perp(d).matrix
    full = d.assembled
    worst_fwd = worst_perp = 0.0
    for _ in range(trials):
        psi = rng.normal(size=n) + 1j * rng.normal(size=n)
        psi /= np.linalg.norm(psi)
        lhs = full @ np.concatenate([psi, t @ psi])
        hp = d.H @ psi
        worst_fwd = max(worst_fwd, float(np.linalg.norm(lhs - np.concatenate([hp, t @ hp]))))
        lhs = full @ np.concatenate([-t @ psi, psi])
        pp = perp @ psi
        worst_perp = max(worst_perp, float(np.linalg.norm(lhs - np.concatenate([-t @ pp, pp]))))
    return DilationResiduals(
        eq_forward=worst_fwd,
        eq_perp=worst_perp,
        hermiticity=hermiticity_residual(full),
        h4_hermiticity=hermiticity_residual(d.H4),
        trials=trials,
        seed=seed,
    )


def spectra_match(xs, ys, tol: float) -> bool:
    """Compare two real multisets by pairing sorted values."""
    xs = np.sort(np.real(np.asarray(xs, dtype=complex)))
    ys = np.sort(np.real(np.asarray(ys, dtype=complex)))
    return xs.shape == ys.shape and bool(np.all(np.abs(xs - ys) <= tol))


def perp_deviation(p: PTParams, pert: Perturbation) -> float:
    """``max|(Hperp)' - H|``; vanishes with the perturbation."""
    return max_abs(perp_closed_form(p, pert).matrix - make_pt_hamiltonian(p))
