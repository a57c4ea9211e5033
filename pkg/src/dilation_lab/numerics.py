"""Small dense complex-matrix kernel.

Everything here works on ``numpy`` complex arrays.  The Hermitian eigensolver
is written out by hand (closed form for 2x2, cyclic complex Jacobi rotations
otherwise) so that its output is deterministic and convention-fixed:

* eigenvalues ascending,
* eigenvectors orthonormal, with degenerate blocks re-orthonormalised by
  Gram-Schmidt in index order,
* the first non-negligible component of every eigenvector real and positive.

These routines double as oracles for the closed-form spectra elsewhere in the
package, so they deliberately do not call ``numpy.linalg``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .config import tolerances
from .errors import HermiticityError, InternalInconsistency, NotPositiveDefinite, SingularMatrix

MAX_DIM = 16
_MAX_SWEEPS = 60


def as_cmatrix(m) -> np.ndarray:
    """Coerce ``m`` to a 2-D complex128 array (column vectors stay ``(n, 1)``)."""
    arr = np.array(m, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def max_abs(m) -> float:
    arr = np.asarray(m)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def scale_of(*mats) -> float:
    """Magnitude used to turn absolute tolerances into scale-aware ones."""
    return max([1.0] + [max_abs(m) for m in mats])


def hermiticity_residual(m) -> float:
    m = as_cmatrix(m)
    return max_abs(m - dagger(m))


def check_hermitian(m, tol: float | None = None) -> np.ndarray:
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    tol = tolerances().hermiticity if tol is None else tol
    res = hermiticity_residual(m)
    if res > tol * scale_of(m):
        raise HermiticityError(res)
    return m


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __iter__(self):
        yield self.eigenvalues
        yield self.eigenvectors

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return v @ np.diag(self.eigenvalues) @ dagger(v)


def _eig2_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = m[0, 0].real
    b = m[1, 1].real
    c = m[0, 1]
    mean = 0.5 * (a + b)
    half = 0.5 * (a - b)
    mag = abs(c)
    r = math.hypot(half, mag)
    if mag == 0.0:
        vals = np.array([a, b])
        vecs = np.eye(2, dtype=complex)
        return vals, vecs
    # reduce to the real symmetric problem [[a, |c|], [|c|, b]] via the phase of c
    theta = 0.5 * math.atan2(2.0 * mag, a - b)
    # unit phase via the argument; dividing by a subnormal |c| overflows
    ph = cmath.exp(-1j * cmath.phase(c))
    ct, st = math.cos(theta), math.sin(theta)
    upper = np.array([ct, ph * st], dtype=complex)
    lower = np.array([-np.conj(ph) * st, ct], dtype=complex)
    vals = np.array([mean - r, mean + r])
    vecs = np.column_stack([lower, upper])
    return vals, vecs


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def _jacobi(m: np.ndarray, offdiag_tol: float) -> tuple[np.ndarray, np.ndarray]:
    a = m.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    target = offdiag_tol * max(1.0, float(np.linalg.norm(a)))
    for _ in range(_MAX_SWEEPS):
        if _offdiag_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                # negligible entries cannot hold up convergence; rotating on them
                # would divide by (possibly subnormal) magnitudes
                if mag <= 1e-3 * target / n:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                sgn = 1.0 if theta >= 0.0 else -1.0
                t = sgn / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                ph = cmath.exp(-1j * cmath.phase(apq))
                j = np.eye(n, dtype=complex)
                j[p, p] = c
                j[p, q] = s
                j[q, p] = -s * ph
                j[q, q] = c * ph
                a = dagger(j) @ a @ j
                # keep the working matrix exactly Hermitian
                a = 0.5 * (a + dagger(a))
                v = v @ j
    else:
        if _offdiag_norm(a) > target:
            raise InternalInconsistency("Jacobi sweeps did not converge")
    return np.diag(a).real.copy(), v


def _gram_schmidt(cols: np.ndarray) -> np.ndarray:
    out = cols.copy()
    for k in range(out.shape[1]):
        vk = out[:, k]
        for j in range(k):
            vk = vk - np.vdot(out[:, j], vk) * out[:, j]
        out[:, k] = vk / np.linalg.norm(vk)
    return out


def _fix_phases(vecs: np.ndarray, zero: float) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col) > zero))
        lead = col[idx]
        col = col * cmath.exp(-1j * cmath.phase(lead))
        col[idx] = abs(col[idx])
        out[:, k] = col
    return out


def herm_eig(m) -> EigenDecomposition:
    """Eigen-decompose a Hermitian matrix.

    Raises
    ------
    HermiticityError
        If ``max|M - M^dagger|`` exceeds the Hermiticity tolerance.
    """
    tol = tolerances()
    m = check_hermitian(m)
    n = m.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"herm_eig supports n <= {MAX_DIM}, got {n}")
    m = 0.5 * (m + dagger(m))
    if n == 1:
        vals, vecs = np.array([m[0, 0].real]), np.ones((1, 1), dtype=complex)
    elif n == 2:
        vals, vecs = _eig2_hermitian(m)
    else:
        vals, vecs = _jacobi(m, tol.jacobi_offdiag)

    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]

    start = 0
    for k in range(1, n + 1):
        if k == n or vals[k] - vals[k - 1] >= tol.degenerate_gap:
            if k - start > 1:
                vecs[:, start:k] = _gram_schmidt(vecs[:, start:k])
            start = k
    vecs = _fix_phases(vecs, tol.phase_zero)

    resid = max_abs(m @ vecs - vecs * vals[np.newaxis, :])
    if not resid <= tol.eig_residual * scale_of(m):
        raise InternalInconsistency(f"eigen-residual {resid:.3e} exceeds tolerance")
    return EigenDecomposition(_frozen(vals), _frozen(vecs))


def general_eig2(m) -> tuple[complex, complex]:
    """Roots of the characteristic polynomial of a 2x2 matrix.

    The discriminant is formed as ``((a - d)/2)**2 + b*c`` to avoid the
    cancellation in ``tr**2/4 - det``.  Roots are ordered by real part, then
    imaginary part.
    """
    m = as_cmatrix(m)
    if m.shape != (2, 2):
        raise ValueError(f"general_eig2 needs a 2x2 matrix, got {m.shape}")
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    mean = 0.5 * (a + d)
    root = cmath.sqrt((0.5 * (a - d)) ** 2 + b * c)
    pair = sorted([complex(mean - root), complex(mean + root)], key=lambda z: (z.real, z.imag))
    return pair[0], pair[1]


def mat_exp_herm(m, t: float) -> np.ndarray:
    """``exp(-i t M)`` for Hermitian ``M`` by spectral synthesis."""
    vals, vecs = herm_eig(m)
    return vecs @ np.diag(np.exp(-1j * t * vals)) @ dagger(vecs)


def mat_exp2(m, t: float) -> np.ndarray:
    """``exp(-i t M)`` for an arbitrary 2x2 ``M``.

    Uses ``N**2 = q**2 I`` for the traceless part ``N`` (Cayley-Hamilton), so it
    stays finite at exceptional points where ``M`` is not diagonalisable.
    """
    m = as_cmatrix(m)
    if m.shape != (2, 2):
        raise ValueError(f"mat_exp2 needs a 2x2 matrix, got {m.shape}")
    mean = 0.5 * (m[0, 0] + m[1, 1])
    n = m - mean * np.eye(2)
    q = cmath.sqrt(n[0, 0] ** 2 + n[0, 1] * n[1, 0])
    tq = t * q
    if abs(tq) < 1e-6:
        sin_over_q = t * (1.0 - tq * tq / 6.0 + tq**4 / 120.0)
    else:
        sin_over_q = cmath.sin(tq) / q
    return cmath.exp(-1j * t * mean) * (cmath.cos(tq) * np.eye(2) - 1j * sin_over_q * n)


def sqrt_pd(m) -> np.ndarray:
    """Hermitian positive-definite square root."""
    vals, vecs = herm_eig(m)
    floor = tolerances().positive_definite
    if vals[0] <= floor:
        raise NotPositiveDefinite(f"minimum eigenvalue {vals[0]:.3e} is not above {floor:.0e}")
    r = vecs @ np.diag(np.sqrt(vals)) @ dagger(vecs)
    return 0.5 * (r + dagger(r))


def inverse2(m) -> np.ndarray:
    m = as_cmatrix(m)
    if m.shape != (2, 2):
        raise ValueError(f"inverse2 needs a 2x2 matrix, got {m.shape}")
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    det = a * d - b * c
    if abs(det) <= tolerances().singular_det:
        raise SingularMatrix(f"|det| = {abs(det):.3e} is below threshold")
    return np.array([[d, -b], [-c, a]], dtype=complex) / det
