import numpy as np
import pytest

from atcopt import geometry, potential


@pytest.mark.parametrize("order", [1, 2])
def test_morse_derivatives(order):
    r = np.linspace(0.8, 1.6, 9)
    h = 1e-6
    fd = (potential.morse(r+h, 1.0, 4.0, order-1)-potential.morse(r-h, 1.0, 4.0, order-1))/(2*h)
    np.testing.assert_allclose(potential.morse(r, 1.0, 4.0, order), fd, rtol=1e-6, atol=1e-8)


def test_morse_minimum():
    assert potential.morse(1.3, 1.3, 4.0, 1) == 0.0
    assert potential.morse(1.3, 1.3, 4.0, 0) == -1.0


def test_site_energy_vanishes_in_reference_lattice(model):
    zero = np.zeros((len(model.interaction_range), 2))
    assert potential.site_energy(model, (0, 0), zero) == 0.0
    assert potential.site_energy(model, (3, 1), zero) == 0.0


def test_defect_site_carries_force(model):
    zero = np.zeros((len(model.interaction_range), 2))
    np.testing.assert_array_equal(potential.site_derivatives(model, (3, 1), zero), 0.0)
    assert np.abs(potential.site_derivatives(model, (0, 0), zero)).max() > 1e-3


def test_defect_mask(model):
    mask = model.defect_mask([[0, 0], [1, 0], [1, 1]])
    np.testing.assert_array_equal(mask, [True, False, False])
    assert not model.homogeneous().defect_mask([[0, 0]])[0]
    assert model.homogeneous().is_homogeneous


def test_site_derivatives_against_differences(model, rng):
    Du = 0.05*rng.standard_normal((len(model.interaction_range), 2))
    V1 = potential.site_derivatives(model, (0, 0), Du, order=1)
    V2 = potential.site_derivatives(model, (0, 0), Du, order=2)
    h = 1e-6
    for (r, i) in [(0, 0), (3, 1), (5, 0)]:
        step = np.zeros_like(Du)
        step[r, i] = h
        fd1 = (potential.site_energy(model, (0, 0), Du+step)-potential.site_energy(model, (0, 0), Du-step))/(2*h)
        assert V1[r, i] == pytest.approx(fd1, rel=1e-6, abs=1e-9)
        fd2 = (potential.site_derivatives(model, (0, 0), Du+step)-potential.site_derivatives(model, (0, 0), Du-step))/(2*h)
        np.testing.assert_allclose(V2[:, r, :, i], fd2, rtol=1e-5, atol=1e-8)


def test_stencil_shape_checked(model):
    with pytest.raises(ValueError, match="one entry per offset"):
        potential.site_energy(model, (0, 0), np.zeros((3, 2)))


def test_shell_weights_must_cover_range():
    with pytest.raises(ValueError, match="shell weights"):
        potential.SiteModel(geometry.nn_nnn_range(), potential.PairPotentialSpec(shell_weights=(1.0,)))
    with pytest.raises(ValueError, match="stiffness"):
        potential.PairPotentialSpec(stiffness=0.0)


def test_cauchy_born_at_zero(cb):
    zero = np.zeros((2, 2))
    assert potential.cauchy_born(cb, zero) == 0.0
    np.testing.assert_array_equal(potential.cauchy_born(cb, zero, 1), 0.0)


def test_cauchy_born_matches_site_energy(cb, homogeneous_model, rng):
    G = 0.1*rng.standard_normal((2, 2))
    stencil = homogeneous_model.interaction_range.array @ G.T
    assert potential.cauchy_born(cb, G) == pytest.approx(
        potential.site_energy(homogeneous_model, (7, -2), stencil), rel=1e-14
    )


def test_cauchy_born_derivatives(cb, rng):
    G = 0.05*rng.standard_normal((2, 2))
    h = 1e-6
    W1 = potential.cauchy_born(cb, G, 1)
    W2 = potential.cauchy_born(cb, G, 2)
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        step = np.zeros((2, 2))
        step[i, j] = h
        fd1 = (potential.cauchy_born(cb, G+step)-potential.cauchy_born(cb, G-step))/(2*h)
        assert W1[i, j] == pytest.approx(fd1, rel=1e-6, abs=1e-10)
        fd2 = (potential.cauchy_born(cb, G+step, 1)-potential.cauchy_born(cb, G-step, 1))/(2*h)
        np.testing.assert_allclose(W2[:, :, i, j], fd2, rtol=1e-5, atol=1e-8)


def test_elasticity_tensor(cb):
    C = cb.elasticity_tensor
    np.testing.assert_allclose(C, np.transpose(C, (2, 3, 0, 1)), atol=1e-12)
    rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert abs(np.einsum("ij,ijkl,kl->", rotation, C, rotation)) < 1e-12
    for E in (np.diag([1.0, 0.0]), np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(2)):
        assert np.einsum("ij,ijkl,kl->", E, C, E) > 0
    assert potential.voigt_matrix(C).shape == (4, 4)


def test_cauchy_born_input_checked(cb):
    with pytest.raises(ValueError):
        potential.cauchy_born(cb, np.zeros(3))


def test_stability_probe(model):
    assert potential.stability_probe(model, N=8) > 0
    with pytest.raises(ValueError, match="N >= 8"):
        potential.stability_probe(model, N=4)
