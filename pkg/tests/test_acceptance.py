"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from oracles import EXAMPLE, EXAMPLE_PERT, draw_params, draw_pert, random_state

from dilation_lab.cli import main, parse_config
from dilation_lab.dilation import ZERO, Perturbation, build_general_dilation, compute_perp, verify_dilation
from dilation_lab.distinguish import (
    LocalVerdict,
    classify,
    constraint_perturbation,
    feasible_d_range,
    gap_same_eigenvalue,
    indistinguishable_d,
)
from dilation_lab.dynamics import evolve_check, sample_bell
from dilation_lab.numerics import general_eig2, herm_eig
from dilation_lab.pictures import (
    Basis,
    Picture,
    Probabilities,
    all_pictures,
    bell_classical,
    bell_local_hermitian,
    bell_simulation,
    saturation_scan,
)
from dilation_lab.pt_model import LocalState, PTParams
from dilation_lab.spectra import coefficients, spectral_data

DATA = Path(__file__).parent / "data"
N_DRAWS = 1000


@pytest.fixture(scope="module")
def draws():
    rng = np.random.default_rng(20240601)
    return [(draw_params(rng), draw_pert(rng)) for _ in range(N_DRAWS)]


def random_local(rng):
    return LocalState.from_angles(rng.uniform(0, math.pi / 2), rng.uniform(0, 2 * math.pi))


def random_basis(rng):
    return Basis.rotated(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))


def test_criterion_01_dilation_identities(draws, record):
    worst_block = worst_herm = 0.0
    for k, (p, pert) in enumerate(draws):
        r = verify_dilation(build_general_dilation(p, pert), trials=5, seed=k)
        worst_block = max(worst_block, r.max_block_residual)
        worst_herm = max(worst_herm, r.hermiticity)
    ok = worst_block <= 1e-9 and worst_herm <= 1e-10
    record(1, ok, f"max block residual {worst_block:.2e} (<=1e-9), max Hermiticity residual {worst_herm:.2e} (<=1e-10)")
    assert ok


def test_criterion_02_spectrum_composition(draws, record):
    worst = 0.0
    for p, pert in draws:
        sd = spectral_data(p, pert)
        vals = herm_eig(build_general_dilation(p, pert).assembled).eigenvalues
        ref = np.sort([sd.lambda_plus, sd.lambda_minus, sd.lambda_p_plus, sd.lambda_p_minus])
        worst = max(worst, float(np.max(np.abs(vals - ref))))
    ok = worst <= 1e-9
    record(2, ok, f"max |eig(H') - closed-form multiset| {worst:.2e} (<=1e-9)")
    assert ok


def test_criterion_03_special_case_collapse(record):
    rng = np.random.default_rng(3)
    worst_perp = worst_pic = worst_spec = 0.0
    h4_equal = True
    for _ in range(200):
        p = draw_params(rng)
        d = build_general_dilation(p, ZERO)
        worst_perp = max(worst_perp, float(np.max(np.abs(compute_perp(d).matrix - d.H))))
        h4_equal &= bool(np.array_equal(d.H4, d.H1))
        lo, hi = sorted([p.E0 - p.s * math.cos(p.alpha), p.E0 + p.s * math.cos(p.alpha)])
        worst_spec = max(worst_spec, float(np.max(np.abs(herm_eig(d.assembled).eigenvalues - [lo, lo, hi, hi]))))

        u = random_local(rng)
        uv = np.conj(u.u) * u.v
        ca = math.cos(p.alpha)
        # simulation: 2E0 + (conj(u) v + u conj(v)) w0 cos(alpha)
        sim = bell_simulation(p, ZERO, u).value
        worst_pic = max(worst_pic, abs(sim - (2 * p.E0 + 2 * uv.real * p.omega0 * ca)))
        # classical: 2E0 + w0 (p+ - p-); (Hperp)' = H but '+' labels its larger eigenvalue
        pp = rng.uniform()
        same = pp if p.omega0 >= 0 else 1 - pp
        cl = bell_classical(p, ZERO, Probabilities.from_plus(pp, same)).value
        worst_pic = max(worst_pic, abs(cl - (2 * p.E0 + p.omega0 * (2 * pp - 1))))
        # local Hermitian: 2E0 + |w0| (p'+ - p'-)
        basis = random_basis(rng)
        lh = bell_local_hermitian(p, ZERO, u, basis).value
        q = basis.prob_plus(u)
        worst_pic = max(worst_pic, abs(lh - (2 * p.E0 + abs(p.omega0) * (2 * q - 1))))
    ok = worst_perp <= 1e-10 and h4_equal and worst_spec <= 1e-10 and worst_pic <= 1e-10
    record(
        3,
        ok,
        f"Hperp-H {worst_perp:.2e}, H4==H1 {h4_equal}, doubled spectrum {worst_spec:.2e}, pictures {worst_pic:.2e} (<=1e-10)",
    )
    assert ok


def test_criterion_04_gap_oracles(draws, record):
    worst_pp = worst_p = worst_im = 0.0
    for p, pert in draws:
        sd = spectral_data(p, pert)
        d = build_general_dilation(p, pert)
        v4 = herm_eig(d.H4).eigenvalues
        worst_pp = max(worst_pp, abs(sd.omega0_pp - (v4[1] - v4[0])))
        lo, hi = general_eig2(compute_perp(d).matrix)
        worst_p = max(worst_p, abs(sd.omega0_p - (hi - lo).real))
        co = coefficients(p, pert)
        worst_im = max(worst_im, abs((co.C1**2 + co.C2**2).imag))
    ok = worst_pp <= 1e-9 and worst_p <= 1e-9 and worst_im <= 1e-10
    record(4, ok, f"w'' vs herm_eig {worst_pp:.2e}, w' vs general_eig2 {worst_p:.2e} (<=1e-9), Im(C1^2+C2^2) {worst_im:.2e} (<=1e-10)")
    assert ok


def test_criterion_05_dual_path(record):
    rng = np.random.default_rng(5)
    worst = {pic: 0.0 for pic in Picture}
    for _ in range(N_DRAWS):
        p, pert = draw_params(rng), draw_pert(rng)
        for r in all_pictures(p, pert, random_local(rng), random_basis(rng), random_basis(rng)):
            worst[r.picture] = max(worst[r.picture], abs(r.value - r.trace_value))
    ok = max(worst.values()) <= 1e-9
    detail = ", ".join(f"{pic.value} {w:.1e}" for pic, w in worst.items())
    record(5, ok, f"max |closed form - trace| per picture: {detail} (<=1e-9)")
    assert ok


def test_criterion_06_bounds_and_saturation(record):
    rng = np.random.default_rng(6)
    start = time.perf_counter()
    worst_excess = -math.inf
    min_sim = min_gen = math.inf
    for _ in range(15):
        p, pert = draw_params(rng, 0.1), draw_pert(rng)
        sd = spectral_data(p, pert)
        basis, basis_p = random_basis(rng), random_basis(rng)
        for pic in Picture:
            rep = saturation_scan(p, pert, pic, grid=256, basis=basis, basis_p=basis_p)
            worst_excess = max(worst_excess, rep.max_abs_deviation - rep.bound)
        min_sim = min(min_sim, saturation_scan(p, pert, Picture.SIMULATION, grid=256).ratio)
        # cos 2delta = sign(w0) is the orientation where the bound becomes (|w0| + w0')/2
        b = Basis.rotated(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        bp = b if p.omega0 >= 0 else Basis(b.minus, b.plus)
        rep = saturation_scan(p, pert, Picture.GENUINE_LOCAL_HERMITIAN, grid=256, basis=b, basis_p=bp)
        assert rep.bound == pytest.approx(0.5 * (abs(sd.omega0) + sd.omega0_p), abs=1e-12)
        min_gen = min(min_gen, rep.ratio)
        # the opposite orientation must still respect its (smaller) bound
        anti = saturation_scan(p, pert, Picture.GENUINE_LOCAL_HERMITIAN, grid=256, basis=b, basis_p=Basis(bp.minus, bp.plus))
        worst_excess = max(worst_excess, anti.max_abs_deviation - anti.bound)
    elapsed = time.perf_counter() - start
    ok = worst_excess <= 1e-9 and min_sim >= 0.99 and min_gen >= 0.99 and elapsed <= 30
    record(
        6,
        ok,
        f"max excess over bound {worst_excess:.1e} (<=1e-9), min saturation simulation {min_sim:.4f} "
        f"genuine {min_gen:.4f} (>=0.99), {elapsed:.1f}s (<=30s)",
    )
    assert ok


def test_criterion_07_same_eigenvalue_gap(record):
    rng = np.random.default_rng(7)
    cases = [EXAMPLE] + [draw_params(rng, 0.1) for _ in range(9)]
    worst_margin = math.inf
    min_gap = math.inf
    formula_err = 0.0
    for p in cases:
        if abs(math.sin(p.alpha)) < 1e-3:
            continue
        lo, hi = feasible_d_range(p)
        for d in np.linspace(lo, hi, 100):
            pert = constraint_perturbation(p, float(d))
            sd = spectral_data(p, pert)
            gap = sd.omega0_p**2 - sd.omega0_pp**2
            floor = 4 * (p.s**2 * math.cos(p.alpha) ** 2 * math.sin(p.alpha) ** 2 + d * d)
            worst_margin = min(worst_margin, gap - floor)
            min_gap = min(min_gap, gap)
            formula_err = max(formula_err, abs(gap - gap_same_eigenvalue(p, pert)))
    ok = worst_margin >= -1e-9 and min_gap > 0 and formula_err <= 1e-9
    record(7, ok, f"min (gap - floor) {worst_margin:.2e} (>=-1e-9), min gap {min_gap:.2e} (>0), closed form err {formula_err:.1e}")
    assert ok


def test_criterion_08_indistinguishable_point(record):
    rng = np.random.default_rng(8)
    worst = 0.0
    shifts_zero = flips = True
    for _ in range(50):
        p = PTParams(0.0, rng.uniform(-2, 2), rng.uniform(-1.5, 1.5))
        d0 = indistinguishable_d(p)
        rep = classify(p, Perturbation(d=d0))
        worst = max(worst, abs(rep.omega0_p - rep.omega0_pp))
        shifts_zero &= rep.shift == 0
        for step in (1e-3, -1e-3):
            flips &= classify(p, Perturbation(d=d0 + step)).vs_local is LocalVerdict.BY_BOUND_GAP
    ok = worst <= 1e-9 and shifts_zero and flips
    record(8, ok, f"max |w' - w''| {worst:.2e} (<=1e-9), shift zero {shifts_zero}, d +/- 1e-3 flips to by_bound_gap {flips}")
    assert ok


def test_criterion_09_post_selection(record):
    rng = np.random.default_rng(9)
    times = [0.1, 0.5, 1.0, 2.0, 5.0]
    worst = 0.0
    for _ in range(20):
        worst = max(worst, evolve_check(EXAMPLE, EXAMPLE_PERT, random_state(rng), times).max_residual)
    ok = worst <= 1e-8
    record(9, ok, f"max post-selection residual {worst:.2e} (<=1e-8) over 20 states x {len(times)} times")
    assert ok


def test_criterion_10_monte_carlo(record):
    u = LocalState(1 / math.sqrt(2), 1 / math.sqrt(2))
    exact = bell_simulation(EXAMPLE, EXAMPLE_PERT, u).value
    worst_z = 0.0
    for seed in range(20):
        est = sample_bell(EXAMPLE, EXAMPLE_PERT, u, 100_000, seed)
        worst_z = max(worst_z, abs(est.mean - exact) / est.stderr)
    again = sample_bell(EXAMPLE, EXAMPLE_PERT, u, 100_000, 7)
    bitwise = again.mean == sample_bell(EXAMPLE, EXAMPLE_PERT, u, 100_000, 7).mean
    ok = worst_z <= 5 and bitwise
    record(10, ok, f"max |sample - closed form| / stderr {worst_z:.2f} (<=5) over 20 seeds, same seed bitwise identical {bitwise}")
    assert ok


def test_criterion_11_cli_round_trip(tmp_path, capsys, record):
    cfg = json.loads((DATA / "example_point.json").read_text())
    cfg.update(sweep_variable="d", sweep_start=-0.5, sweep_stop=0.5, sweep_steps=21)
    cfg_path = tmp_path / "scan.json"
    cfg_path.write_text(json.dumps(cfg))
    out_path = tmp_path / "scan.csv"
    code = main(["scan", "--config", str(cfg_path), "--format", "csv", "--output", str(out_path)])
    rows = list(csv.DictReader(io.StringIO(out_path.read_text())))

    run_cfg = parse_config(cfg)
    worst_rel = 0.0
    lossless = True
    for k, row in enumerate(rows):
        point = run_cfg.with_sweep_value(float(run_cfg.sweep.points()[k]))
        exact = {"index": k, "sweep_value": float(run_cfg.sweep.points()[k]), **spectral_data(point.params, point.pert).as_dict()}
        exact["omega_gap"] = exact["omega0_p"] - exact["omega0_pp"]
        for r in all_pictures(point.params, point.pert, point.state, *point.bases()):
            exact[f"{r.picture.value}_value"] = r.value
            exact[f"{r.picture.value}_bound"] = r.bound
        for key, text in row.items():
            parsed = float(text)
            lossless &= format(parsed, ".12g") == text or (key == "index" and int(text) == k)
            if exact[key] != 0:
                worst_rel = max(worst_rel, abs(parsed - exact[key]) / abs(exact[key]))
            else:
                lossless &= parsed == 0
    round_trip = code == 0 and len(rows) == 21 and lossless and worst_rel <= 5e-12

    codes = {}
    for name, command in [
        ("exceptional_point.json", "dilate"),
        ("unknown_sweep_variable.json", "scan"),
        ("unnormalized_state.json", "bell"),
    ]:
        codes[name] = main([command, "--config", str(DATA / name)])
    capsys.readouterr()
    exits_ok = all(c == 2 for c in codes.values())
    ok = round_trip and exits_ok
    record(11, ok, f"scan CSV round trip max rel err {worst_rel:.1e} (12 sig. digits), lossless {lossless}; invalid-config exit codes {sorted(codes.values())} (all 2)")
    assert ok
