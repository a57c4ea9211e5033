"""Two-level PT-symmetric Hamiltonian, its metric operator and local states.

The family is

    H = E0 * I + s * [[i sin(alpha), 1], [1, -i sin(alpha)]]

with real spectrum ``E0 +/- s cos(alpha)`` whenever ``cos(alpha) != 0``.  A
metric operator ``tau`` (Hermitian, invertible) links ``H`` to a Hermitian
dilation through ``H^dagger (I + tau^2) = (I + tau^2) H``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .config import tolerances
from .errors import BrokenSymmetry, ExceptionalPoint, InternalInconsistency, NotDiagonalizable, NotNormalized
from .numerics import MAX_DIM, as_cmatrix, dagger, herm_eig, max_abs, scale_of, sqrt_pd


@dataclass(frozen=True)
class PTParams:
    E0: float
    s: float
    alpha: float

    def validate(self) -> "PTParams":
        tol = tolerances()
        for name in ("E0", "s", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if abs(math.cos(self.alpha)) <= tol.exceptional_cos:
            raise ExceptionalPoint(
                f"exceptional point: |cos(alpha)| = {abs(math.cos(self.alpha)):.3e}, "
                "the Hamiltonian is not diagonalisable"
            )
        if abs(self.s) <= tol.degenerate_s:
            warnings.warn("s is ~0: the PT Hamiltonian has a degenerate spectrum", RuntimeWarning, stacklevel=3)
        return self

    @property
    def omega0(self) -> float:
        """Signed gap ``2 s cos(alpha)``."""
        return 2.0 * self.s * math.cos(self.alpha)


class TauSource(enum.Enum):
    CLOSED_FORM_2D = "closed-form-2d"
    CONSTRUCTED_GENERAL = "constructed-general"


@dataclass(frozen=True)
class MetricTau:
    matrix: np.ndarray
    source: TauSource

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def eta(self) -> np.ndarray:
        """The pseudo-metric ``I + tau^2``."""
        n = self.matrix.shape[0]
        return np.eye(n) + self.matrix @ self.matrix


@dataclass(frozen=True)
class LocalState:
    """Alice's local state ``|u+> = u|0> + v|1>``; ``|u-> = conj(v)|0> - conj(u)|1>``."""

    u: complex
    v: complex

    def __post_init__(self):
        norm = abs(self.u) ** 2 + abs(self.v) ** 2
        if abs(norm - 1.0) > tolerances().normalization:
            raise NotNormalized(f"|u|^2 + |v|^2 = {norm!r}, expected 1")

    @classmethod
    def from_angles(cls, theta: float, phase: float = 0.0) -> "LocalState":
        return cls(complex(math.cos(theta)), complex(math.sin(theta) * np.exp(1j * phase)))

    @property
    def plus(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=complex)

    @property
    def minus(self) -> np.ndarray:
        return np.array([np.conj(self.v), -np.conj(self.u)], dtype=complex)


def make_pt_hamiltonian(p: PTParams) -> np.ndarray:
    p.validate()
    sa = math.sin(p.alpha)
    return p.E0 * np.eye(2, dtype=complex) + p.s * np.array([[1j * sa, 1.0], [1.0, -1j * sa]])


def pt_eigenvalues(p: PTParams) -> tuple[float, float]:
    """``(E0 - |s cos a|, E0 + |s cos a|)``, i.e. the two eigenvalues sorted."""
    p.validate()
    half = p.s * math.cos(p.alpha)
    lo, hi = sorted((p.E0 - half, p.E0 + half))
    return lo, hi


def make_tau(p: PTParams) -> MetricTau:
    p.validate()
    sa, ca = math.sin(p.alpha), math.cos(p.alpha)
    mat = np.array([[1.0, -1j * sa], [1j * sa, 1.0]], dtype=complex) / ca
    return MetricTau(mat, TauSource.CLOSED_FORM_2D)


def intertwining_residual(h, tau) -> float:
    """``max|H^dagger (I + tau^2) - (I + tau^2) H|``."""
    h = as_cmatrix(h)
    t = tau.matrix if isinstance(tau, MetricTau) else as_cmatrix(tau)
    eta = np.eye(h.shape[0]) + t @ t
    return max_abs(dagger(h) @ eta - eta @ h)


def make_general_tau(h, margin: float = 0.1) -> MetricTau:
    """Construct a metric for any diagonalisable ``H`` with real spectrum.

    With ``H = S L S^-1`` the operator ``eta0 = (S S^dagger)^-1`` satisfies
    ``H^dagger eta0 = eta0 H``.  It is rescaled so that ``eta - I`` has smallest
    eigenvalue ``margin``; ``tau`` is the positive square root of ``eta - I``.
    The metric is not unique; this returns one representative.
    """
    tol = tolerances()
    h = as_cmatrix(h)
    n = h.shape[0]
    if h.shape != (n, n) or n > MAX_DIM:
        raise ValueError(f"expected a square matrix with n <= {MAX_DIM}, got {h.shape}")
    if margin <= 0:
        raise ValueError("margin must be positive")
    vals, vecs = np.linalg.eig(h)
    if np.max(np.abs(vals.imag)) > tol.general_tau_imag * scale_of(h):
        raise BrokenSymmetry(f"complex eigenvalues {vals}: PT symmetry is broken")
    cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > tol.general_tau_cond:
        raise NotDiagonalizable(f"eigenvector matrix condition number {cond:.3e}")
    eta0 = np.linalg.inv(vecs @ dagger(vecs))
    eta0 = 0.5 * (eta0 + dagger(eta0))
    lam_min = herm_eig(eta0).eigenvalues[0]
    eta = eta0 * ((1.0 + margin) / lam_min)
    tau = sqrt_pd(eta - np.eye(n))
    resid = intertwining_residual(h, tau)
    if resid > tol.metric_mismatch * scale_of(h) * scale_of(eta):
        raise InternalInconsistency(f"constructed tau has intertwining residual {resid:.3e}")
    return MetricTau(tau, TauSource.CONSTRUCTED_GENERAL)


def make_local_states(u: complex, v: complex) -> tuple[np.ndarray, np.ndarray]:
    """Column vectors ``(|u+>, |u->)``."""
    st = LocalState(complex(u), complex(v))
    return st.plus.reshape(2, 1), st.minus.reshape(2, 1)
