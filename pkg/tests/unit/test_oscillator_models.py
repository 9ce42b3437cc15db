"""
Unit tests for machine-model generators and closed forms
"""
import numpy as np
import pytest
from pydantic import ValidationError

from src.errors import BelowThreshold, InvalidRates
from src.models.fock import FockCutoff
from src.models.params import KpoParams, ModelSpec, NetworkSpec, OpoParams, PumpSchedule
from src.models.results import ClassicalState
from src.services import fock_space, oscillator_models


def _random_density(dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def test_negative_kerr_is_canonicalised():
    """Test K < 0 flips the overall sign of the Hamiltonian"""
    params = KpoParams(K=-2.0, Delta=0.5)
    assert params.K == 2.0
    assert params.Delta == -0.5
    assert params.flipped
    assert params.pump_sign == -1.0


def test_zero_kerr_rejected():
    """Test K = 0 is invalid"""
    with pytest.raises(ValidationError):
        KpoParams(K=0.0, Delta=1.0)


def test_opo_params_validation():
    """Test kappa >= 0 and kappa2 > 0"""
    with pytest.raises(ValidationError):
        OpoParams(kappa=-1.0, kappa2=1.0)
    with pytest.raises(ValidationError):
        OpoParams(kappa=1.0, kappa2=0.0)


def test_kpo_hamiltonian_two_photon_level():
    """Test H|2> = K|2> at p = 0, Delta = 0"""
    cutoff = FockCutoff(n_max=10)
    h = oscillator_models.kpo_hamiltonian(KpoParams(K=1.0, Delta=0.0), 0.0, cutoff)
    out = h.apply(fock_space.ket(2, cutoff).amplitudes)
    np.testing.assert_allclose(out, fock_space.ket(2, cutoff).amplitudes, atol=1e-12)


def test_kpo_coherent_states_are_degenerate_eigenstates():
    """Test H + p^2/(2K) annihilates |+-sqrt(p/K)> at Delta = 0"""
    cutoff = FockCutoff(n_max=30)
    h = oscillator_models.kpo_hamiltonian(KpoParams(K=1.0, Delta=0.0), 1.0, cutoff)
    for alpha in (1.0, -1.0):
        psi = fock_space.coherent_state(alpha, cutoff).amplitudes
        residual = h.apply(psi) + 0.5 * psi
        assert np.linalg.norm(residual[:25]) < 1e-8


def test_kpo_vacuum_ground_state_without_pump(kpo_params):
    """Test the vacuum has eigenvalue 0 and is the ground state at p = 0, Delta = 1"""
    h = oscillator_models.kpo_hamiltonian(kpo_params, 0.0, FockCutoff(n_max=12)).dense()
    eigenvalues = np.linalg.eigvalsh(h)
    assert eigenvalues[0] == pytest.approx(0.0, abs=1e-12)


def test_kpo_hamiltonian_hermitian_and_parity_symmetric(kpo_params):
    """Test Hermiticity and [H, P] = 0"""
    cutoff = FockCutoff(n_max=15)
    h = oscillator_models.kpo_hamiltonian(kpo_params, 2.3, cutoff).dense()
    p = fock_space.parity(cutoff).dense()
    assert np.max(np.abs(h - h.conj().T)) < 1e-12
    assert np.max(np.abs(h @ p - p @ h)) == 0.0


def test_opo_coherent_states_are_stationary():
    """Test |+-1> are steady states at kappa = 0, p = 1, kappa2 = 1"""
    cutoff = FockCutoff(n_max=30)
    hamiltonian, terms = oscillator_models.opo_generator(OpoParams(kappa=0.0, kappa2=1.0), 1.0, cutoff)
    for alpha in (1.0, -1.0):
        rho = fock_space.ket2dm(fock_space.coherent_state(alpha, cutoff)).elements
        rho_dot = oscillator_models.liouvillian(hamiltonian, terms, rho)
        assert np.linalg.norm(rho_dot[:25, :25]) < 1e-6


def test_opo_vacuum_steady_without_pump(opo_params):
    """Test the vacuum is stationary under pure decay"""
    cutoff = FockCutoff(n_max=8)
    hamiltonian, terms = oscillator_models.opo_generator(opo_params, 0.0, cutoff)
    rho = fock_space.ket2dm(fock_space.vacuum((cutoff.dim,))).elements
    assert np.linalg.norm(oscillator_models.liouvillian(hamiltonian, terms, rho)) < 1e-14


def test_opo_generator_preserves_trace(opo_params):
    """Test Tr rho_dot = 0 for a random density matrix"""
    cutoff = FockCutoff(n_max=8)
    hamiltonian, terms = oscillator_models.opo_generator(opo_params, 1.7, cutoff)
    rho_dot = oscillator_models.liouvillian(hamiltonian, terms, _random_density(cutoff.dim, 3))
    assert abs(np.trace(rho_dot)) < 1e-10
    assert [t.label for t in terms] == ["one-photon", "two-photon"]
    assert terms[1].rate == pytest.approx(0.5)


def test_coupling_block_in_single_excitation_sector(pair_network, kpo_params):
    """Test the coupling acts as -xi0 * swap on |1,0>, |0,1>"""
    cutoff = FockCutoff(n_max=3)
    dims = (4, 4)
    h_c = oscillator_models.coupling_hamiltonian(pair_network, fock_space.mode_annihilators(dims)).dense()
    i10, i01 = 1 * 4 + 0, 0 * 4 + 1
    block = h_c[np.ix_([i10, i01], [i10, i01])]
    np.testing.assert_allclose(block, -0.5 * np.array([[0, 1], [1, 0]]))
    h = oscillator_models.qbm_network_hamiltonian(pair_network, kpo_params, 0.0, cutoff)
    assert h.dims == dims


def test_network_vacuum_is_ground_state(pair_network, kpo_params):
    """Test positive semidefiniteness at p = 0 when Delta - xi0 lambda_max >= 0"""
    h = oscillator_models.qbm_network_hamiltonian(pair_network, kpo_params, 0.0, FockCutoff(n_max=6)).dense()
    eigenvalues = np.linalg.eigvalsh(h)
    assert eigenvalues[0] >= -1e-9
    assert eigenvalues[0] == pytest.approx(0.0, abs=1e-9)


def test_network_parity_symmetry(pair_network, kpo_params):
    """Test [H, P1 P2] = 0"""
    cutoff = FockCutoff(n_max=5)
    dims = (6, 6)
    h = oscillator_models.qbm_network_hamiltonian(pair_network, kpo_params, 1.3, cutoff).dense()
    p = fock_space.tensor_op([fock_space.parity(cutoff)] * 2, dims).dense()
    assert np.max(np.abs(h @ p - p @ h)) < 1e-12


def test_coherent_basis_coupling_energy(pair_network):
    """Test <s|H_c|s> = -xi0 alpha^2 sum_ij J_ij s_i s_j on tensor coherent states"""
    alpha = 1.0
    cutoff = FockCutoff(n_max=25)
    dims = (26, 26)
    h_c = oscillator_models.coupling_hamiltonian(pair_network, fock_space.mode_annihilators(dims))
    for s1, s2 in ((1, 1), (1, -1)):
        state = fock_space.tensor_state([
            fock_space.coherent_state(s1 * alpha, cutoff), fock_space.coherent_state(s2 * alpha, cutoff),
        ])
        expected = -0.5 * alpha ** 2 * 2 * s1 * s2
        assert fock_space.expectation(h_c, state).real == pytest.approx(expected, abs=1e-8)


def test_cim_lindblad_pair_operator(pair_network, opo_params):
    """Test the pair jump L = a1 - a2 with rate xi0 for ferromagnetic coupling"""
    cutoff = FockCutoff(n_max=3)
    _, terms = oscillator_models.cim_lindblad_set(pair_network, opo_params, 0.0, cutoff)
    pair = [t for t in terms if t.label.startswith("injection")]
    assert len(pair) == 1
    assert pair[0].rate == pytest.approx(0.5)
    a1, a2 = fock_space.mode_annihilators((4, 4))
    np.testing.assert_allclose(pair[0].jump_operator.dense(), (a2 - a1).dense())
    local = [t.rate for t in terms if t.label.startswith("one-photon")]
    np.testing.assert_allclose(local, [0.5, 0.5])


@pytest.mark.parametrize("J", [
    [[0.0, 1.0], [1.0, 0.0]],
    [[0.0, -0.7], [-0.7, 0.0]],
    [[0.0, 0.4, -0.6], [0.4, 0.0, 0.3], [-0.6, 0.3, 0.0]],
])
def test_lindblad_form_matches_coupled_form(J):
    """Test the Lindblad decomposition reproduces the coupled OPO-network generator"""
    spec = NetworkSpec(J=np.array(J), xi0=0.5)
    opo = OpoParams(kappa=1.0, kappa2=1.0)
    cutoff = FockCutoff(n_max=2)
    hamiltonian, terms = oscillator_models.cim_lindblad_set(spec, opo, 1.4, cutoff)
    coupled = oscillator_models.cim_table_generator(spec, opo, 1.4, cutoff)
    rho = _random_density(hamiltonian.dim, 11)
    lindblad = oscillator_models.liouvillian(hamiltonian, terms, rho)
    assert np.max(np.abs(lindblad - coupled(rho))) < 1e-10


def test_cim_rejects_negative_local_rate(opo_params):
    """Test InvalidRates when xi0 sum |J| exceeds kappa"""
    spec = NetworkSpec(J=np.array([[0.0, 1.0], [1.0, 0.0]]), xi0=1.5)
    with pytest.raises(InvalidRates):
        oscillator_models.cim_lindblad_set(spec, opo_params, 0.0, FockCutoff(n_max=2))


def test_cim_without_coupling_is_independent_opos(opo_params):
    """Test J = 0 gives only local channels"""
    spec = NetworkSpec(J=np.zeros((2, 2)), xi0=0.5)
    _, terms = oscillator_models.cim_lindblad_set(spec, opo_params, 1.0, FockCutoff(n_max=2))
    assert sorted(t.label for t in terms) == ["one-photon:0", "one-photon:1", "two-photon:0", "two-photon:1"]
    assert all(t.rate in (1.0, 0.5) for t in terms)


def test_thresholds(kpo_params, opo_params, pair_network):
    """Test closed-form thresholds for single oscillators and networks"""
    assert oscillator_models.threshold("kpo", kpo_params) == 1.0
    assert oscillator_models.threshold("opo", opo_params) == 1.0
    assert pair_network.lambda_max == pytest.approx(1.0)
    assert oscillator_models.threshold("qbm", kpo_params, pair_network) == pytest.approx(0.5)
    uncoupled = NetworkSpec(J=np.array([[0.0, 1.0], [1.0, 0.0]]), xi0=0.0)
    assert oscillator_models.threshold("qbm", kpo_params, uncoupled) == 1.0


def test_network_lambda_max_consistency():
    """Test an inconsistent lambda_max is rejected"""
    with pytest.raises(ValidationError):
        NetworkSpec(J=np.array([[0.0, 1.0], [1.0, 0.0]]), xi0=0.5, lambda_max=2.0)
    with pytest.raises(ValidationError):
        NetworkSpec(J=np.array([[1.0, 1.0], [1.0, 0.0]]), xi0=0.5)
    with pytest.raises(ValidationError):
        NetworkSpec(J=np.array([[0.0, 1.0], [0.5, 0.0]]), xi0=0.5)


def test_oscillation_amplitudes(kpo_params, opo_params):
    """Test the stable-branch magnitudes"""
    assert oscillator_models.oscillation_amplitude("kpo", kpo_params, 3.0) == pytest.approx(np.sqrt(2.0))
    assert oscillator_models.oscillation_amplitude("opo", opo_params, 4.0) == pytest.approx(np.sqrt(3.0))
    assert oscillator_models.oscillation_amplitude("kpo", kpo_params, 1.0) == 0.0
    with pytest.raises(BelowThreshold):
        oscillator_models.oscillation_amplitude("kpo", kpo_params, 0.5)


def test_classical_rhs_vanishes_at_fixed_points(kpo_params, opo_params):
    """Test the equations of motion vanish on the post-threshold branches"""
    for kind, params in (("kpo", kpo_params), ("opo", opo_params)):
        amp = oscillator_models.oscillation_amplitude(kind, params, 3.0)
        x_dot, y_dot = oscillator_models.classical_rhs(kind, params, 3.0, np.array([amp]), np.array([0.0]))
        assert abs(x_dot[0]) < 1e-12 and abs(y_dot[0]) < 1e-12


def test_classical_rhs_vectorised(pair_network, kpo_params):
    """Test ensemble rows are integrated independently"""
    x = np.array([[0.1, -0.2], [0.3, 0.4]])
    y = np.array([[0.0, 0.1], [-0.1, 0.2]])
    x_dot, y_dot = oscillator_models.classical_rhs("qbm", kpo_params, 1.0, x, y, pair_network)
    row_x, row_y = oscillator_models.classical_rhs("qbm", kpo_params, 1.0, x[1], y[1], pair_network)
    np.testing.assert_allclose(x_dot[1], row_x)
    np.testing.assert_allclose(y_dot[1], row_y)


def test_opo_energy_is_gradient_potential(opo_params, pair_network):
    """Test the OPO flow is minus the gradient of its energy"""
    x = np.array([0.3, -0.4])
    y = np.array([0.2, 0.1])
    x_dot, y_dot = oscillator_models.classical_rhs("cim", opo_params, 1.2, x, y, pair_network)
    eps = 1e-6
    for i in range(2):
        step = np.zeros(2)
        step[i] = eps
        grad_x = (oscillator_models.classical_energy("cim", opo_params, 1.2, x + step, y, pair_network)
                  - oscillator_models.classical_energy("cim", opo_params, 1.2, x - step, y, pair_network)) / (2 * eps)
        grad_y = (oscillator_models.classical_energy("cim", opo_params, 1.2, x, y + step, pair_network)
                  - oscillator_models.classical_energy("cim", opo_params, 1.2, x, y - step, pair_network)) / (2 * eps)
        assert x_dot[i] == pytest.approx(-grad_x, abs=1e-6)
        assert y_dot[i] == pytest.approx(-grad_y, abs=1e-6)


def test_expectation_rhs_on_coherent_state(kpo_params):
    """Test the moment equation equals the classical flow on a coherent state"""
    alpha = 0.8 + 0.3j
    cutoff = FockCutoff(n_max=30)
    state = fock_space.coherent_state(alpha, cutoff)
    quantum = oscillator_models.expectation_value_rhs("kpo", kpo_params, 2.0, state)
    x_dot, y_dot = oscillator_models.classical_rhs("kpo", kpo_params, 2.0, np.array([alpha.real]), np.array([alpha.imag]))
    assert quantum == pytest.approx(complex(x_dot[0], y_dot[0]), abs=1e-8)


def test_model_spec_missing_keys():
    """Test required keys per model kind"""
    spec = ModelSpec(kind="qbm", K=1.0, Delta=1.0)
    assert spec.missing_keys() == ["xi0", "J"]
    with pytest.raises(ValidationError):
        ModelSpec(kind="kpo", K=1.0, Delta=1.0, unknown=3)


def test_model_cutoff_defaults():
    """Test the truncation defaults for single oscillators and networks"""
    assert oscillator_models.model_cutoff(ModelSpec(kind="kpo", K=1.0, Delta=1.0)).n_max == 24
    pair = ModelSpec(kind="qbm", K=1.0, Delta=1.0, xi0=0.5, J=[[0, 1], [1, 0]])
    assert oscillator_models.model_cutoff(pair).dim == 20
    quad = ModelSpec(kind="cim", kappa=1.0, kappa2=1.0, xi0=0.25, J=(np.ones((4, 4)) - np.eye(4)).tolist())
    assert oscillator_models.model_cutoff(quad).dim == 10
    explicit = ModelSpec(kind="opo", kappa=1.0, kappa2=1.0, cutoff=7)
    assert oscillator_models.model_cutoff(explicit).n_max == 7


def test_pump_schedule():
    """Test the linear ramp and its inverse"""
    schedule = PumpSchedule(p_start=0.0, p_end=4.0, t_final=100.0)
    assert schedule.pump(25.0) == pytest.approx(1.0)
    assert schedule.pump(150.0) == pytest.approx(4.0)
    assert schedule.time_at(3.0) == pytest.approx(75.0)
    assert PumpSchedule.frozen(2.0, 10.0).pump(3.0) == 2.0
    with pytest.raises(ValidationError):
        PumpSchedule(t_final=0.0)
