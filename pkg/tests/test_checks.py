import math

import numpy as np
import pytest

from atcopt import analysis, checks, coupling, modes


def test_check_result():
    assert checks.CheckResult("a", 1e-9, 1e-8).passed
    assert not checks.CheckResult("b", 1e-7, 1e-8).passed
    assert not checks.CheckResult("c", math.nan, 1.0).passed
    assert checks.CheckResult("d", 0.0, 1.0).line().endswith("PASS")


def test_check_derivatives_on_quadratic(rng):
    A = rng.standard_normal((5, 5))
    A = A @ A.T
    (g_err, h_err) = checks.check_derivatives(
        lambda x: 0.5*x @ A @ x, lambda x: A @ x, lambda x, v: A @ v, 5, rng, states=3,
    )
    assert g_err < 1e-8
    assert h_err < 1e-8
    (g_err, _) = checks.check_derivatives(
        lambda x: 0.5*x @ A @ x, lambda x: 2*A @ x, lambda x, v: A @ v, 5, rng, states=3,
    )
    assert g_err > 0.1


def test_sandwich_bounds_use_full_norms():
    norms = {"atomistic": 2.0, "continuum": 3.0, "overlap_atomistic": 1.0, "overlap_continuum": 1.0, "op": 1.0}
    (lower, upper) = checks.sandwich_bounds(0.5, 2.0, 3.0, norms)
    assert lower == pytest.approx(0.5*13/9)
    assert upper == pytest.approx(26.0)


def test_norm_sandwich_at_coupled_state(small_problem, small_state, rng):
    A = analysis.build_harmonic_basis(modes.BasisKind.kAtomistic, small_problem, small_state.u_a)
    C = analysis.build_harmonic_basis(modes.BasisKind.kContinuum, small_problem, small_state.u_c)
    c = analysis.sup_cosine(A, C)
    control_a = analysis.overlap_control_constant(A, A.full_gram)
    control_c = analysis.overlap_control_constant(C, C.full_gram)
    assert control_a >= 1-1e-12
    assert control_c >= 1-1e-12
    for _ in range(3):
        mu = checks.random_controls(small_problem, rng, amplitude=1.0)
        norms = coupling.control_norms(small_state, mu)
        (lower, upper) = checks.sandwich_bounds(c, control_a, control_c, norms)
        assert lower <= norms["op"]**2*(1+1e-6)
        assert norms["op"]**2 <= upper
        assert norms["atomistic"] >= norms["overlap_atomistic"]
        assert norms["continuum"] >= norms["overlap_continuum"]


def test_reduced_gradient_at_random_controls(small_problem, rng):
    controls = checks.random_controls(small_problem, rng)
    assert np.abs(controls.flat()).max() > 0
    result = checks.reduced_gradient_check(small_problem, rng, controls, directions=2)
    assert result.name == "reduced gradient Rcore2-psi4-kappa3 random"
    assert result.passed


def test_run_checks():
    results = checks.run_checks(seed=0)
    failed = [result.line() for result in results if not result.passed]
    assert failed == []
    names = {result.name for result in results}
    assert "reduced gradient Rcore2-psi4-kappa3 zero" in names
    assert "reduced gradient Rcore4-psi4-kappa2 random" in names
    assert "norm sandwich lower excess" in names
    assert "norm sandwich upper excess" in names
    assert len(names) == len(results)
    assert np.all([np.isfinite(result.value) for result in results])
