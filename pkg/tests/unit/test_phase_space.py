"""
Unit tests for Wigner functions, fixed points and quadrature projectors
"""
import numpy as np
import pytest

from src.errors import TruncationError
from src.models.fock import FockCutoff
from src.models.results import ClassicalState, GridAxis
from src.services import fock_space, phase_space

TWO_OVER_PI = 2.0 / np.pi


@pytest.fixture
def small_axis():
    return GridAxis(min=-2.0, max=2.0, resolution=5)


def test_vacuum_wigner_is_gaussian(settings):
    """Test W(alpha) = (2/pi) exp(-2|alpha|^2) for the vacuum"""
    state = fock_space.ket(0, FockCutoff(n_max=10))
    axis = GridAxis(min=-1.0, max=1.0, resolution=5)
    grid = phase_space.wigner_single(state, axis, settings=settings)
    xs, ys = np.meshgrid(axis.values(), axis.values(), indexing="ij")
    np.testing.assert_allclose(grid.values, TWO_OVER_PI * np.exp(-2 * (xs ** 2 + ys ** 2)), atol=1e-12)
    assert grid.slice_tag == "single"
    assert grid.metadata["method"] == "clenshaw"


def test_origin_value_is_scaled_parity(settings):
    """Test W(0) = (2/pi) <P> for Fock states and cats"""
    cutoff = FockCutoff(n_max=17)
    axis = GridAxis(min=-1.0, max=1.0, resolution=3)
    one = phase_space.wigner_single(fock_space.ket(1, cutoff), axis, settings=settings)
    even = phase_space.wigner_single(fock_space.cat_state(1.0, 1, cutoff), axis, settings=settings)
    odd = phase_space.wigner_single(fock_space.cat_state(1.0, -1, cutoff), axis, settings=settings)
    assert one.value_at(0, 0) == pytest.approx(-TWO_OVER_PI, abs=1e-12)
    assert even.value_at(0, 0) == pytest.approx(TWO_OVER_PI, abs=1e-9)
    assert odd.value_at(0, 0) == pytest.approx(-TWO_OVER_PI, abs=1e-9)


def test_clenshaw_matches_displacement(settings, small_axis):
    """Test both Wigner evaluations agree on a cat state"""
    state = fock_space.cat_state(1.0, 1, FockCutoff(n_max=17))
    series = phase_space.wigner_single(state, small_axis, settings=settings)
    displaced = phase_space.wigner_single(state, small_axis, method="displacement", settings=settings)
    np.testing.assert_allclose(series.values, displaced.values, atol=1e-7)


def test_density_matrix_input_matches_state(settings, small_axis):
    """Test pure states give the same grid as their density matrix"""
    state = fock_space.coherent_state(0.5 + 0.5j, FockCutoff(n_max=16))
    from_ket = phase_space.wigner_single(state, small_axis, settings=settings)
    from_rho = phase_space.wigner_single(fock_space.ket2dm(state), small_axis, settings=settings)
    np.testing.assert_allclose(from_ket.values, from_rho.values, atol=1e-12)


def test_wigner_normalisation_and_peak(settings):
    """Test the Wigner function integrates to one and peaks at alpha"""
    state = fock_space.coherent_state(1.0, FockCutoff(n_max=17))
    grid = phase_space.wigner_single(state, GridAxis(min=-4.5, max=4.5, resolution=61), settings=settings)
    assert grid.integral() == pytest.approx(1.0, abs=1e-3)
    i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    assert grid.axis0.values()[i] == pytest.approx(1.0, abs=0.1)
    assert grid.axis1.values()[j] == pytest.approx(0.0, abs=0.1)
    assert grid.negativity_volume() < 1e-6


def test_even_state_wigner_is_inversion_symmetric(settings):
    """Test W(-alpha) = W(alpha) for a parity-even state"""
    state = fock_space.cat_state(1.2 + 0.4j, 1, FockCutoff(n_max=20))
    grid = phase_space.wigner_single(state, GridAxis(min=-3.0, max=3.0, resolution=41), settings=settings)
    np.testing.assert_allclose(grid.values, grid.values[::-1, ::-1], atol=1e-8)


def test_cat_has_negative_volume(settings):
    """Test cat interference fringes are negative"""
    state = fock_space.cat_state(1.5, -1, FockCutoff(n_max=22))
    grid = phase_space.wigner_single(state, GridAxis(min=-4.0, max=4.0, resolution=61), settings=settings)
    assert grid.negativity_volume() > 0.05


def test_wigner_rejects_truncated_state(settings, small_axis):
    """Test states living in the top Fock levels are refused"""
    with pytest.raises(TruncationError):
        phase_space.wigner_single(fock_space.ket(6, FockCutoff(n_max=6)), small_axis, settings=settings)


def test_two_mode_slice_of_product_state(settings):
    """Test a product state's slice factorises into single-mode values"""
    cutoff = FockCutoff(n_max=17)
    first = fock_space.coherent_state(1.0, cutoff)
    second = fock_space.coherent_state(-0.5, cutoff)
    state = fock_space.tensor_state([first, second])
    axis = GridAxis(min=-2.0, max=2.0, resolution=9)
    grid = phase_space.wigner_two_mode_slice(state, "y1=y2=0", axis, settings=settings)
    zero = GridAxis(min=-1e-3, max=1e-3, resolution=3)
    w1 = phase_space.wigner_single(first, axis, zero, settings=settings).values[:, 1]
    w2 = phase_space.wigner_single(second, axis, zero, settings=settings).values[:, 1]
    np.testing.assert_allclose(grid.values, np.outer(w1, w2), atol=1e-10)
    assert grid.slice_tag == "y1=y2=0"


def test_two_mode_vacuum_on_imaginary_slice(settings):
    """Test the two-mode vacuum at the origin of the x1=x2=0 slice"""
    state = fock_space.vacuum((8, 8))
    axis = GridAxis(min=-1.0, max=1.0, resolution=3)
    grid = phase_space.wigner_two_mode_slice(state, "x1=x2=0", axis, settings=settings)
    assert grid.value_at(0, 0) == pytest.approx(TWO_OVER_PI ** 2, abs=1e-12)
    assert grid.value_at(1, 1) == pytest.approx(TWO_OVER_PI ** 2 * np.exp(-4), abs=1e-12)


def test_two_mode_slice_needs_two_modes(settings, small_axis):
    with pytest.raises(ValueError):
        phase_space.wigner_two_mode_slice(fock_space.ket(0, FockCutoff(n_max=4)), "y1=y2=0", small_axis, settings)


def test_kpo_fixed_points_above_threshold(kpo_params):
    """Test the pitchfork: a saddle at the origin and two centers at +-sqrt(2)"""
    report = phase_space.classical_fixed_points("kpo", kpo_params, 3.0)
    assert report.count == 3
    origin = report.points[0]
    assert (origin.x, origin.y) == (0.0, 0.0)
    assert origin.classification == "saddle"
    stable = report.stable_points()
    assert sorted(point.x for point in stable) == pytest.approx([-np.sqrt(2), np.sqrt(2)])
    assert all(point.classification == "center" for point in stable)


def test_kpo_below_threshold_is_a_center(kpo_params):
    report = phase_space.classical_fixed_points("kpo", kpo_params, 0.5)
    assert report.as_pairs() == [(0.0, 0.0)]
    assert report.points[0].classification == "center"


def test_opo_fixed_points(opo_params):
    """Test OPO attractors at +-sqrt((p - kappa)/kappa2)"""
    report = phase_space.classical_fixed_points("opo", opo_params, 2.0)
    classes = {(round(point.x, 9), round(point.y, 9)): point.classification for point in report.points}
    assert classes == {(0.0, 0.0): "saddle", (1.0, 0.0): "attractor", (-1.0, 0.0): "attractor"}
    below = phase_space.classical_fixed_points("opo", opo_params, 0.5)
    assert below.count == 1
    assert below.points[0].classification == "attractor"


def test_phase_portrait_minimum(kpo_params):
    """Test the KPO energy landscape has its minima at the stable branch"""
    axis = GridAxis(min=-2.5, max=2.5, resolution=51)
    portrait = phase_space.phase_portrait("kpo", kpo_params, 3.0, axis)
    assert portrait.slice_tag == "energy"
    assert portrait.values.min() == pytest.approx(-1.0, abs=0.02)
    assert len(portrait.metadata["fixed_points"]) == 3
    z = ClassicalState(x=[np.sqrt(2)], y=[0.0])
    assert phase_space.classical_energy("kpo", kpo_params, 3.0, z) == pytest.approx(-1.0)


def test_cat_fidelity():
    cutoff = FockCutoff(n_max=20)
    even = fock_space.cat_state(1.3, 1, cutoff)
    assert phase_space.cat_fidelity(even, 1.3) == pytest.approx(1.0)
    assert phase_space.cat_fidelity(even, 1.3, -1) == pytest.approx(0.0, abs=1e-12)


def test_half_line_overlaps_structure():
    """Test diagonal 1/2, symmetry, and vanishing same-parity elements"""
    overlaps = phase_space.half_line_overlaps(12)
    np.testing.assert_allclose(np.diag(overlaps), 0.5)
    np.testing.assert_allclose(overlaps, overlaps.T, atol=1e-14)
    assert overlaps[0, 2] == 0.0
    assert overlaps[0, 1] == pytest.approx(1.0 / np.sqrt(2.0 * np.pi))


def test_quadrature_sign_projectors():
    """Test the projectors split a displaced state by the sign of x"""
    cutoff = FockCutoff(n_max=30)
    plus = phase_space.quadrature_sign_projector(1, cutoff)
    minus = phase_space.quadrature_sign_projector(-1, cutoff)
    np.testing.assert_allclose((plus + minus).dense(), np.eye(cutoff.dim), atol=1e-14)
    vacuum = fock_space.ket(0, cutoff)
    assert fock_space.expectation(plus, vacuum).real == pytest.approx(0.5)
    right = fock_space.coherent_state(2.0, cutoff)
    assert fock_space.expectation(plus, right).real > 0.999
    assert fock_space.expectation(minus, right).real < 1e-3
    with pytest.raises(ValueError):
        phase_space.quadrature_sign_projector(0, cutoff)


def test_sign_projectors_are_idempotent_at_even_dimension():
    """Test Pi^2 = Pi and P Pi_+ P = Pi_- when the truncation has an even dimension"""
    cutoff = FockCutoff(n_max=29)
    plus = phase_space.quadrature_sign_projector(1, cutoff).dense()
    minus = phase_space.quadrature_sign_projector(-1, cutoff).dense()
    np.testing.assert_allclose(plus @ plus, plus, atol=1e-8)
    np.testing.assert_allclose(minus @ minus, minus, atol=1e-8)
    np.testing.assert_allclose(plus @ minus, np.zeros_like(plus), atol=1e-8)
    parity = fock_space.parity(cutoff).dense()
    np.testing.assert_allclose(parity @ plus @ parity, minus, atol=1e-10)


def test_sign_projectors_split_parity_states_evenly():
    """Test an even cat and the vacuum sit half on each side of x = 0"""
    cutoff = FockCutoff(n_max=29)
    plus = phase_space.quadrature_sign_projector(1, cutoff)
    even = fock_space.cat_state(1.5, 1, cutoff)
    assert fock_space.expectation(plus, even).real == pytest.approx(0.5, abs=1e-10)
    assert fock_space.expectation(plus, fock_space.ket(0, cutoff)).real == pytest.approx(0.5, abs=1e-10)


def test_odd_dimension_shares_the_unpaired_eigenvector():
    """Test the lone overlap eigenvalue 1/2 of an odd dimension is split between the projectors"""
    cutoff = FockCutoff(n_max=30)
    plus = phase_space.quadrature_sign_projector(1, cutoff).dense()
    eigenvalues = np.linalg.eigvalsh(plus)
    assert np.sum(np.abs(eigenvalues - 0.5) < 1e-8) == 1
    assert np.sum(eigenvalues > 0.75) == 15
    assert np.trace(plus) == pytest.approx(cutoff.dim / 2)
