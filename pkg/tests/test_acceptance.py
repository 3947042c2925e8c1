"""End-to-end acceptance: one test per criterion, pinned tolerances.

Each test prints a single PASS line (visible with -s) and asserts its
runtime budget; failures surface as ordinary assertion errors before the
line is printed.
"""

import math
import time

import numpy as np
import pytest
from scipy.special import gammaincc, gamma as gamma_fn

from blowuplab.auxcalc import build_aux_table, check_hypothesis, verify_equivalences
from blowuplab.coeffs import DampingModel, ProblemSpec
from blowuplab.exponents import (
    classic_exponents,
    hardy_ranges,
    meaningful_delta_boundary,
    p_crit_damped,
    p_fujita,
    p_kato,
    p_sobolev,
    p_strauss,
)
from blowuplab.functional import (
    ManufacturedSolution,
    MultiIndex,
    predicted_slope,
    scan_condition,
    weak_residual,
)
from blowuplab.simulator import GaussianData, SimSpec, convergence_test, run

from conftest import unit_problem


def report(number: int, started: float, budget: float, detail: str = "") -> None:
    elapsed = time.perf_counter() - started
    assert elapsed < budget, f"criterion {number} exceeded {budget:.0f}s ({elapsed:.1f}s)"
    suffix = f" — {detail}" if detail else ""
    print(f"ACCEPTANCE {number}: PASS ({elapsed:.2f}s){suffix}")


def test_criterion_1_exponent_catalog():
    """Closed-form catalog values, exact where the formulas are rational."""
    started = time.perf_counter()
    assert p_fujita(1) == 3.0
    assert p_fujita(2) == 2.0
    assert p_kato(3) == 2.0
    assert p_sobolev(3) == 5.0
    strauss = p_strauss(2)
    assert abs(strauss - (1.0 + math.sqrt(2.0))) <= 1e-10
    assert abs(1.0 * strauss**2 - 2.0 * strauss - 1.0) <= 1e-10  # k p^2-(k+2)p-2, k=2
    for n in range(1, 7):
        assert p_crit_damped(n, 0.0, 0.0, 0.0).p_crit == p_fujita(n)
    hardy = hardy_ranges(3, 2.0, m=2)
    assert hardy.s == 1.0
    assert abs(hardy.mass_range.p_crit - 5.0 / 3.0) <= 1e-14
    classic_exponents(3)  # assembles without error
    report(1, started, 1.0)


CLOSED_FORMS = {
    ("constant", 0.5): None,
    ("constant", 1.0): None,
    ("constant", 2.0): None,
    ("powerlaw", 0.5): None,
    ("powerlaw", -0.5): None,
}


def _exact_aux(model: DampingModel, t: float):
    """Closed-form (B, beta, Gamma, g) for the acceptance families."""
    if model.kind == "constant":
        mu = model.mu
        B = t / mu
        beta = math.exp(-mu * t)
        Gamma = beta / mu
        return B, beta, Gamma, 1.0 / mu
    kappa = model.kappa
    B = ((1.0 + t) ** (1.0 + kappa) - 1.0) / (1.0 + kappa)
    beta = math.exp(-((1.0 + t) ** (1.0 - kappa) - 1.0) / (1.0 - kappa))
    if kappa == 0.5:
        s = math.sqrt(1.0 + t)
        Gamma = (s + 0.5) * math.exp(2.0 - 2.0 * s)
    elif kappa == -0.5:
        u0 = (1.0 + t) ** 1.5
        Gamma = ((2.0 / 3.0) ** (1.0 / 3.0) * math.exp(2.0 / 3.0)
                 * gammaincc(2.0 / 3.0, 2.0 * u0 / 3.0) * gamma_fn(2.0 / 3.0))
    else:
        raise ValueError(kappa)
    return B, beta, Gamma, Gamma / beta


def test_criterion_2_auxiliary_functions():
    """B, beta, Gamma, bhat1, g within 1e-8 relative of analytic values."""
    started = time.perf_counter()
    models = [DampingModel.constant(mu) for mu in (0.5, 1.0, 2.0)]
    models += [DampingModel.power_law(1.0, k) for k in (-0.5, 0.5)]
    rng = np.random.default_rng(2024)
    for model in models:
        aux = build_aux_table(model, 150.0)
        want_bhat1 = 1.0 / _exact_aux(model, 0.0)[2]
        assert abs(aux.bhat1 - want_bhat1) <= 1e-8 * want_bhat1, model
        for t in rng.uniform(0.0, 100.0, 50):
            t = float(t)
            B, beta, Gamma, g = _exact_aux(model, t)
            assert abs(aux.B_at(t) - B) <= 1e-8 * max(B, 1e-12), (model, t)
            assert abs(aux.beta_at(t) - beta) <= 1e-8 * beta, (model, t)
            assert abs(aux.Gamma_at(t) - Gamma) <= 1e-8 * Gamma, (model, t)
            assert abs(aux.g_at(t) - g) <= 1e-8 * g, (model, t)
        # defining identity of g, derivative by centered differencing
        h = 1e-4
        worst = 0.0
        for t in np.linspace(h, 50.0, 80):
            gp = (aux.Gamma_at(t + h) / aux.beta_at(t + h)
                  - aux.Gamma_at(t - h) / aux.beta_at(t - h)) / (2.0 * h)
            worst = max(worst, abs(-gp + aux.g_at(t) * float(model.b(t)) - 1.0))
        assert worst <= 1e-6, (model, worst)
    report(2, started, 10.0, "5 families x 50 times")


def test_criterion_3_hypothesis_checker():
    started = time.perf_counter()
    failing = check_hypothesis(DampingModel.power_law(0.5, 1.0), 1e5)
    assert abs(failing.liminf_est - (-2.0)) <= 1e-3
    assert not failing.passes_liminf
    passing = check_hypothesis(DampingModel.power_law(2.0, 1.0), 1e5)
    assert abs(passing.liminf_est - (-0.5)) <= 1e-3
    assert passing.admissible
    for kappa in (-0.9, -0.5, 0.0, 0.5, 0.9):
        rep = check_hypothesis(DampingModel.power_law(1.0, kappa), 1e5)
        assert rep.admissible, kappa
    report(3, started, 5.0)


def test_criterion_4_equivalence_ratios():
    started = time.perf_counter()
    models = [DampingModel.constant(mu) for mu in (0.5, 1.0, 2.0)]
    models += [DampingModel.power_law(1.0, k) for k in (-0.5, 0.5)]
    for model in models:
        aux = build_aux_table(model, 1e4)
        rep = verify_equivalences(aux, 1e4)
        mask = aux.grid >= 1.0
        b_on = np.asarray(model.b(aux.grid[mask]))
        gb = aux.g_vals[mask] * b_on
        Bbt = aux.B_vals[mask] * b_on / aux.grid[mask]
        for arr in (gb, Bbt):
            assert np.min(arr) >= 0.2 and np.max(arr) <= 5.0, model
        if model.kind == "constant":
            assert abs(rep.gamma_ratio_min - 1.0) <= 1e-8
            assert abs(rep.gamma_ratio_max - 1.0) <= 1e-8
            assert abs(rep.B_ratio_min - 1.0) <= 1e-8
            assert abs(rep.B_ratio_max - 1.0) <= 1e-8
    report(4, started, 10.0)


def test_criterion_5_criticality_scan(aux_const1_scan):
    """Fitted slopes match the closed-form exponents across the critical power."""
    started = time.perf_counter()
    ladder = [8.0, 16.0, 32.0, 64.0, 128.0, 256.0]
    expected = {3.0: 0.0, 4.0: 0.25, 2.0: -0.5}
    for p, slope in expected.items():
        res = scan_condition(unit_problem(p), ladder, aux=aux_const1_scan)
        assert abs(res.fitted["2e_space"] - slope) <= 0.05, p
        assert abs(res.fitted["e0"] - slope) <= 0.05, p
        assert abs(res.predicted["2e_space"] - slope) <= 1e-12, p
    # calibrated equality of the two first-order exponents
    for alpha in (0.0, 0.25, 0.5):
        for gamma in (0.0, 0.5, 1.0):
            for n in (1, 2, 3):
                p = 1.0 + 2.5 * (1.0 + gamma) / (n * (1.0 - alpha))
                spec = ProblemSpec(n=n, alpha=alpha, gamma=gamma, delta=0.0,
                                   p=p, damping=DampingModel.constant(1.0))
                assert predicted_slope(spec, MultiIndex.time1(n)) == \
                    predicted_slope(spec, MultiIndex.space2(n)), (alpha, gamma, n)
    report(5, started, 60.0, "slopes 0 / +0.25 / -0.5 at p = 3 / 4 / 2")


def test_criterion_6_weak_form_identity():
    started = time.perf_counter()
    aux = build_aux_table(DampingModel.constant(1.0), 20.0)
    sol = ManufacturedSolution.decaying_cosine()
    spec = unit_problem(2.0)
    reference = weak_residual(sol, spec, aux, panels=64)
    assert reference <= 1e-6
    ladder = [weak_residual(sol, spec, aux, panels=pp) for pp in (8, 16, 32, 64)]
    for coarse, fine in zip(ladder, ladder[1:]):
        assert coarse / fine >= 4.0, ladder
    report(6, started, 5.0, f"reference residual {reference:.2e}")


def test_criterion_7_blowup_exhibit():
    started = time.perf_counter()
    for p in (1.2, 1.5, 2.0):
        out = run(SimSpec(problem=unit_problem(p), r_max=60.0, J=1200,
                          T_max=50.0, u1=GaussianData(5.0, 1.0)))
        assert out.verdict == "blowup" and out.t_star < 50.0, p
    coarse = run(SimSpec(problem=unit_problem(1.5), r_max=60.0, J=1200,
                         T_max=50.0, u1=GaussianData(5.0, 1.0)))
    fine = run(SimSpec(problem=unit_problem(1.5), r_max=60.0, J=2400,
                       T_max=50.0, u1=GaussianData(5.0, 1.0)))
    assert abs(coarse.t_star - fine.t_star) <= 0.1 * coarse.t_star
    linear = run(SimSpec(problem=unit_problem(1.5), r_max=8.0, J=400,
                         T_max=200.0, u1=GaussianData(5.0, 1.0),
                         nonlinearity=0.0, allow_boundary_reflections=True))
    assert linear.sup_norms[-1] <= 1e-3 * float(np.max(linear.sup_norms))
    order = convergence_test(unit_problem(1.5))["observed_order"]
    assert abs(order - 2.0) <= 0.2
    report(7, started, 120.0, f"order {order:.3f}")


def test_criterion_8_meaningfulness_boundary():
    started = time.perf_counter()
    rng = np.random.default_rng(808)
    for _ in range(10):
        n = int(rng.integers(1, 6))
        alpha = float(rng.uniform(-1.0, 0.9))
        gamma = float(rng.uniform(-0.9, 1.5))
        d_star = meaningful_delta_boundary(n, alpha, gamma)
        assert p_crit_damped(n, alpha, gamma, d_star + 1e-9).meaningful, (n, alpha, gamma)
        assert not p_crit_damped(n, alpha, gamma, d_star - 1e-9).meaningful, (n, alpha, gamma)
    report(8, started, 1.0)
