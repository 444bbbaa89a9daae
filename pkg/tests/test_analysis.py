import numpy as np
import pytest

from atcopt import analysis, exception, linalg, modes


def _basis(matrix, full_matrix=None):
    return analysis.HarmonicBasis(modes.BasisKind.kAtomistic, np.asarray(matrix, dtype=float), full_matrix)


def test_constant_free_directions():
    D = analysis.constant_free_directions(4)
    assert D.shape == (8, 6)
    np.testing.assert_array_equal(linalg.constant_modes(4).T @ D.toarray(), 0)
    assert np.linalg.matrix_rank(D.toarray()) == 6


@pytest.mark.parametrize("theta", [0.3, 1.0, np.pi/2])
def test_sup_cosine_of_lines(theta):
    A = _basis([[1.0], [0.0]])
    C = _basis([[np.cos(theta)], [np.sin(theta)]])
    assert analysis.sup_cosine(A, C) == pytest.approx(abs(np.cos(theta)), abs=1e-15)


def test_sup_cosine_ignores_scaling_and_rank(rng):
    A = _basis(rng.standard_normal((6, 2)) @ np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]))
    C = _basis(np.vstack([np.zeros((3, 2)), 5*np.eye(3)[:, :2]]))
    expected = np.linalg.svd(
        np.linalg.qr(A.matrix)[0][:, :2].T @ np.linalg.qr(C.matrix)[0], compute_uv=False
    ).max()
    assert analysis.sup_cosine(A, C) == pytest.approx(expected, rel=1e-10)


def test_sup_cosine_keeps_small_singular_values():
    # columns along e1 and e2 with singular values 1 and 1e-7
    A = _basis([[1.0, 0.0], [0.0, 1e-7], [0.0, 0.0]])
    C = _basis([[0.0], [1.0], [0.0]])
    with pytest.warns(RuntimeWarning, match="indistinguishable"):
        assert analysis.sup_cosine(A, C) == pytest.approx(1.0)
    # below the cutoff the direction is dropped
    A = _basis([[1.0, 0.0], [0.0, 1e-11], [0.0, 0.0]])
    assert analysis.sup_cosine(A, C) == pytest.approx(0.0, abs=1e-15)


def test_overlap_control_constant_on_weak_direction():
    # overlap singular values 1 and 1e-7; the weak direction is 10 times larger on the full domain
    B = _basis(np.diag([1.0, 1e-7]), np.diag([1.0, 1e-6]))
    assert analysis.overlap_control_constant(B) == pytest.approx(10.0, rel=1e-8)


def test_sup_cosine_of_same_subspace_warns():
    A = _basis([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    with pytest.warns(RuntimeWarning, match="indistinguishable"):
        assert analysis.sup_cosine(A, A) == pytest.approx(1.0)


def test_sup_cosine_input_errors():
    with pytest.raises(ValueError, match="overlap rows"):
        analysis.sup_cosine(_basis(np.ones((2, 1))), _basis(np.ones((3, 1))))
    with pytest.raises(exception.EigensolverError, match="rank zero"):
        analysis.sup_cosine(_basis(np.zeros((2, 2))), _basis(np.ones((2, 1))))


def test_overlap_control_constant():
    B = _basis(np.eye(2), np.diag([2.0, 3.0]))
    assert analysis.overlap_control_constant(B) == pytest.approx(3.0)
    with pytest.raises(ValueError, match="full-domain"):
        analysis.overlap_control_constant(_basis(np.eye(2)))


def test_harmonic_bases(small_problem, small_state):
    A = analysis.build_harmonic_basis(modes.BasisKind.kAtomistic, small_problem, small_state.u_a)
    C = analysis.build_harmonic_basis(modes.BasisKind.kContinuum, small_problem, small_state.u_c)
    assert len(A) == 2*(small_problem.n_atomistic_controls-1)
    assert len(C) == 2*(small_problem.n_continuum_controls-1)
    assert A.matrix.shape[0] == C.matrix.shape[0] == 4*480
    assert A.constant_leak < 1e-8
    assert C.constant_leak < 1e-8
    with pytest.raises(ValueError, match="basis kind"):
        analysis.build_harmonic_basis("atomistic", small_problem, small_state.u_a)


def test_norm_equivalence(small_problem, small_state):
    result = analysis.norm_equivalence(small_problem, small_state.u_a, small_state.u_c)
    assert 0 < result["sup_cosine"] < 1
    assert result["margin"] == pytest.approx(1-result["sup_cosine"]**2)
    assert result["control_atomistic"] >= 1-1e-12
    assert result["control_continuum"] >= 1-1e-12
    assert result["columns_atomistic"] == 2*(small_problem.n_atomistic_controls-1)
