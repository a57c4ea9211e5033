from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import EXAMPLE, EXAMPLE_PERT, draw_params, draw_pert, random_hermitian

from dilation_lab.dilation import (
    ZERO,
    DilatedHamiltonian,
    DilationKind,
    Perturbation,
    build_general_dilation,
    build_special_dilation,
    compute_perp,
    dilation_from_h1,
    perp_closed_form,
    perp_deviation,
    spectra_match,
    verify_dilation,
)
from dilation_lab.errors import MetricMismatch
from dilation_lab.numerics import general_eig2, herm_eig, hermiticity_residual
from dilation_lab.pt_model import MetricTau, PTParams, TauSource, make_general_tau, make_pt_hamiltonian, make_tau

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def identity_tau(n=2):
    return MetricTau(np.eye(n, dtype=complex), TauSource.CONSTRUCTED_GENERAL)


class TestSpecial:
    def test_hermitian_limit(self, rng):
        h = random_hermitian(rng, 2)
        d = build_special_dilation(h, identity_tau())
        assert np.allclose(d.H1, h, atol=1e-14)
        assert np.allclose(d.H2, 0, atol=1e-14)
        assert np.allclose(d.assembled, np.kron(np.eye(2), h), atol=1e-14)

    def test_example_blocks(self):
        p = EXAMPLE
        d = build_special_dilation(make_pt_hamiltonian(p), make_tau(p))
        w0 = math.sqrt(3)
        ca, sa = math.cos(p.alpha), math.sin(p.alpha)
        assert np.allclose(d.H1, p.E0 * np.eye(2) + 0.5 * w0 * ca * SX, atol=1e-14)
        assert np.allclose(d.H2, 0.5j * w0 * sa * SZ, atol=1e-14)
        assert np.array_equal(d.H4, d.H1)
        assert d.kind is DilationKind.SPECIAL

    def test_spectrum_doubled(self):
        p = EXAMPLE
        d = build_special_dilation(make_pt_hamiltonian(p), make_tau(p))
        lo, hi = 1 - math.sqrt(3) / 2, 1 + math.sqrt(3) / 2
        assert np.allclose(herm_eig(d.assembled).eigenvalues, [lo, lo, hi, hi], atol=1e-12)

    def test_metric_mismatch(self):
        with pytest.raises(MetricMismatch):
            build_special_dilation(make_pt_hamiltonian(EXAMPLE), identity_tau())

    def test_assembled_is_read_only(self):
        d = build_general_dilation(EXAMPLE)
        with pytest.raises(ValueError):
            d.assembled[0, 0] = 0


class TestGeneral:
    def test_zero_perturbation_is_special(self):
        special = build_special_dilation(make_pt_hamiltonian(EXAMPLE), make_tau(EXAMPLE))
        general = build_general_dilation(EXAMPLE, ZERO)
        assert np.array_equal(general.assembled, special.assembled)

    def test_example_point(self):
        d = build_general_dilation(EXAMPLE, EXAMPLE_PERT)
        r = verify_dilation(d, trials=100)
        assert r.hermiticity <= 1e-10
        assert r.max_block_residual <= 1e-9

    def test_spectrum_is_union(self):
        d = build_general_dilation(EXAMPLE, EXAMPLE_PERT)
        parts = list(general_eig2(d.H)) + list(general_eig2(compute_perp(d).matrix))
        assert spectra_match(herm_eig(d.assembled).eigenvalues, parts, 1e-9)

    def test_spectrum_union_random(self, rng):
        for _ in range(500):
            p, pert = draw_params(rng), draw_pert(rng)
            d = build_general_dilation(p, pert)
            parts = list(general_eig2(d.H)) + list(general_eig2(perp_closed_form(p, pert).matrix))
            assert spectra_match(herm_eig(d.assembled).eigenvalues, parts, 1e-9)

    def test_generic_route_agrees(self, rng):
        for _ in range(100):
            p, pert = draw_params(rng, 0.2), draw_pert(rng)
            d = build_general_dilation(p, pert)
            g = dilation_from_h1(d.H, d.tau, d.H1)
            assert np.max(np.abs(g.assembled - d.assembled)) <= 1e-10 * max(1, np.abs(d.assembled).max())


class TestPerp:
    def test_special_is_h(self):
        d = build_general_dilation(EXAMPLE)
        assert np.max(np.abs(compute_perp(d).matrix - d.H)) <= 1e-12

    def test_hermitian_trivial(self, rng):
        h = random_hermitian(rng, 2)
        d = build_special_dilation(h, identity_tau())
        assert np.max(np.abs(compute_perp(d).matrix - h)) <= 1e-14

    def test_closed_form_matches_direct(self):
        direct = compute_perp(build_general_dilation(EXAMPLE, EXAMPLE_PERT)).matrix
        assert np.max(np.abs(direct - perp_closed_form(EXAMPLE, EXAMPLE_PERT).matrix)) <= 1e-12

    def test_closed_form_zero(self):
        assert np.array_equal(perp_closed_form(EXAMPLE, ZERO).matrix, make_pt_hamiltonian(EXAMPLE))

    def test_d_shifts_off_diagonal(self):
        d = 0.3
        shift = perp_closed_form(EXAMPLE, Perturbation(d=d)).matrix - make_pt_hamiltonian(EXAMPLE)
        c2 = math.cos(EXAMPLE.alpha) ** 2
        assert shift[0, 1].real == pytest.approx(2 * d / c2, abs=1e-14)
        assert shift[1, 0].real == pytest.approx(2 * d / c2, abs=1e-14)

    def test_linear_collapse_on_rays(self, rng):
        ks = []
        for _ in range(20):
            p, direction = draw_params(rng, 0.2), draw_pert(rng)
            devs = [perp_deviation(p, direction.scaled(k)) for k in np.linspace(0, 1, 11)]
            assert devs[0] == 0
            assert all(b >= a for a, b in zip(devs, devs[1:]))
            ks.append(max(dv / (k * direction.norm()) for dv, k in zip(devs[1:], np.linspace(0, 1, 11)[1:])))
        print(f"fitted Lipschitz constant K = {max(ks):.4g}")


class TestVerifier:
    def test_special_many_trials(self):
        r = verify_dilation(build_general_dilation(EXAMPLE), trials=100, seed=3)
        assert r.max_block_residual <= 1e-9 and r.trials == 100

    def test_detects_tampering(self):
        d = build_general_dilation(EXAMPLE)
        h2 = np.array(d.H2)
        h2[0, 1] += 0.01
        bad = DilatedHamiltonian.from_blocks(d.H, d.H1, h2, d.H4, d.tau, d.kind)
        assert verify_dilation(bad).max_block_residual >= 1e-3

    def test_trivial(self, rng):
        h = random_hermitian(rng, 2)
        r = verify_dilation(build_special_dilation(h, identity_tau()))
        assert r.max_block_residual <= 1e-12

    def test_needs_trials(self):
        with pytest.raises(ValueError):
            verify_dilation(build_general_dilation(EXAMPLE), trials=0)


def _pseudo_hermitian(rng, n):
    s = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 2 * np.eye(n)
    return s @ np.diag(rng.uniform(-2, 2, n)) @ np.linalg.inv(s)


class TestHermiticityEquivalence:
    def test_valid_metric_gives_hermitian_h4(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 4))
            h = _pseudo_hermitian(rng, n)
            tau = make_general_tau(h)
            d = dilation_from_h1(h, tau, random_hermitian(rng, n))
            assert hermiticity_residual(d.H4) <= 1e-9 * max(1, np.abs(d.H4).max())
            assert verify_dilation(d, trials=10).max_block_residual <= 1e-8 * max(1, np.abs(d.assembled).max())

    def test_broken_metric_breaks_hermiticity(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 4))
            h = _pseudo_hermitian(rng, n)
            tau = make_general_tau(h)
            bump = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            bad = h + 1e-3 * bump / np.abs(bump).max()
            with pytest.raises(MetricMismatch):
                dilation_from_h1(bad, tau, np.eye(n))
            d = dilation_from_h1(bad, tau, np.eye(n), check_metric=False)
            res = hermiticity_residual(d.H4)
            assert 1e-6 <= res <= 1e-1


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1.4, 1.4))
def test_block_identities_property(a, b, c, d, alpha):
    p = PTParams(0.5, 1.2, alpha)
    r = verify_dilation(build_general_dilation(p, Perturbation(a, b, c, d)), trials=5)
    assert r.hermiticity <= 1e-10
    assert r.max_block_residual <= 1e-9
