"""Time evolution inside the dilation and sampled correlators.

``evolve_check`` confirms that post-selecting the ancilla on ``|0>`` after
evolving ``psi0 (+) tau psi0`` under the dilated Hamiltonian reproduces the
non-unitary PT evolution ``exp(-i t H) psi0``, up to a complex scale.

The sampler measures the global Hamiltonian in its eigenbasis starting from
``|j> (x) |u>``.  Randomness comes from ``numpy``'s PCG64 bit generator seeded
through ``SeedSequence``; sub-streams are spawned, never re-seeded by hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import tolerances
from .dilation import ZERO, Perturbation, build_general_dilation
from .errors import NotNormalized
from .numerics import as_cmatrix, check_hermitian, herm_eig, mat_exp2, mat_exp_herm
from .pictures import correlators
from .pt_model import LocalState, PTParams


@dataclass(frozen=True)
class EvolutionReport:
    times: list[float]
    postselect_residuals: list[float]
    norm_ratios: list[float]
    fidelities: list[float] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.postselect_residuals, default=0.0)


def evolve_check(p: PTParams, pert: Perturbation, psi0, times) -> EvolutionReport:
    """Compare the post-selected dilated evolution with ``exp(-i t H) psi0``.

    The top block is matched to the target after the optimal complex rescale,
    since post-selection only fixes the state up to normalisation.
    ``norm_ratios`` holds the post-selection success probability.
    """
    psi0 = as_cmatrix(psi0).ravel()
    if psi0.shape != (2,):
        raise ValueError("psi0 must be a 2-component state")
    if abs(np.vdot(psi0, psi0).real - 1.0) > tolerances().normalization * 100:
        raise NotNormalized("psi0 must be normalised")
    d = build_general_dilation(p, pert)
    embedded = np.concatenate([psi0, d.tau.matrix @ psi0])
    embedded /= np.linalg.norm(embedded)

    times = [float(t) for t in times]
    residuals, ratios, fids = [], [], []
    for t in times:
        if not math.isfinite(t):
            raise ValueError("times must be finite")
        phi = mat_exp_herm(d.assembled, t) @ embedded
        top = phi[:2]
        target = mat_exp2(d.H, t) @ psi0
        norm2 = float(np.vdot(top, top).real)
        gamma = np.vdot(top, target) / norm2
        residuals.append(float(np.linalg.norm(gamma * top - target)))
        ratios.append(norm2)
        fids.append(float(abs(np.vdot(top, target)) / (math.sqrt(norm2) * np.linalg.norm(target))))
    return EvolutionReport(times, residuals, ratios, fids)


@dataclass(frozen=True)
class SampleEstimate:
    mean: float
    stderr: float
    n: int
    seed: int
    shards: int = 1


def _as_seedseq(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))


def _draw(vals: np.ndarray, probs: np.ndarray, n: int, seedseq: np.random.SeedSequence, shards: int):
    # shard boundaries depend only on (n, shards); each shard has its own spawned stream
    sizes = [n // shards + (1 if k < n % shards else 0) for k in range(shards)]
    streams = seedseq.spawn(shards) if shards > 1 else [seedseq]
    counts = np.zeros(len(vals), dtype=np.int64)
    for size, ss in zip(sizes, streams):
        rng = np.random.Generator(np.random.PCG64(ss))
        counts += rng.multinomial(size, probs)
    return counts


def _summarise(vals: np.ndarray, counts: np.ndarray, n: int) -> tuple[float, float]:
    seen = vals[counts > 0]
    if np.all(seen == seen[0]):
        return float(seen[0]), 0.0
    mean = float(np.dot(counts, vals) / n)
    if n < 2:
        return mean, math.inf
    var = float(np.dot(counts, (vals - mean) ** 2) / (n - 1))
    return mean, math.sqrt(var / n)


def _sample_vector(g: np.ndarray, phi: np.ndarray, n: int, seedseq, shards: int) -> tuple[float, float]:
    vals, vecs = herm_eig(g)
    probs = np.abs(vecs.conj().T @ phi) ** 2
    probs = probs / probs.sum()
    counts = _draw(vals, probs, n, seedseq, shards)
    return _summarise(vals, counts, n)


def sample_expectation(g, j: int, u: LocalState, n: int, seed: int, *, sign: int = +1, shards: int = 1) -> SampleEstimate:
    """Estimate ``Tr[(|j><j| (x) |u><u|) G]`` from ``n`` eigenvalue draws.

    ``sign=-1`` uses ``|u->`` instead of ``|u+>``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if shards < 1 or shards > n:
        raise ValueError("shards must be between 1 and n")
    if j not in (0, 1):
        raise ValueError("ancilla index j must be 0 or 1")
    g = check_hermitian(g)
    if g.shape != (4, 4):
        raise ValueError(f"expected a 4x4 Hamiltonian, got {g.shape}")
    local = u.plus if sign > 0 else u.minus
    phi = np.kron(np.eye(2)[j], local)
    mean, se = _sample_vector(g, phi, n, _as_seedseq(seed), shards)
    return SampleEstimate(mean, se, n, int(seed), shards)


def sample_bell(p: PTParams, pert: Perturbation, u: LocalState, n: int, seed: int, *, shards: int = 1) -> SampleEstimate:
    """Sampled ``B0A0 + B0A1 + B1A0 - B1A1`` for the dilated Hamiltonian.

    The four correlators use independent streams spawned from ``seed``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    g = build_general_dilation(p, pert).assembled
    children = np.random.SeedSequence(int(seed)).spawn(4)
    terms = [(0, +1, 1.0), (0, -1, 1.0), (1, +1, 1.0), (1, -1, -1.0)]
    total, var = 0.0, 0.0
    for (j, sign, weight), ss in zip(terms, children):
        local = u.plus if sign > 0 else u.minus
        mean, se = _sample_vector(g, np.kron(np.eye(2)[j], local), n, ss, shards)
        total += weight * mean
        var += se * se
    return SampleEstimate(total, math.sqrt(var), n, int(seed), shards)


def exact_bell(p: PTParams, pert: Perturbation = ZERO, u: LocalState | None = None) -> float:
    """Trace value the sampler estimates."""
    u = LocalState(1.0, 0.0) if u is None else u
    return correlators(build_general_dilation(p, pert).assembled, u).bell
