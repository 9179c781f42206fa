"""Propagator tests: the eigendecomposition exponential against a
scaling-and-squaring oracle, unitarity, block structure, Trotter
convergence, and full-space agreement."""

import numpy as np
import pytest
import scipy.linalg

from fluxgate.device import basis_for, build_hamiltonian, full_basis
from fluxgate.errors import EvolutionError
from fluxgate.fidelity import computational_indices, fidelity_report, \
    project_to_computational
from fluxgate.propagator import TrotterConfig, evolve, expm_skew
from fluxgate.profiles import three_transmon_chain
from fluxgate.pulses import PiecewiseConstantWaveform, PulseSchedule


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2


class TestExpmSkew:
    def test_zero_gives_identity(self):
        assert np.array_equal(expm_skew(np.zeros((4, 4)), 2.0), np.eye(4))

    def test_diagonal_phases(self):
        w = np.array([0.0, 1.5, -2.0])
        u = expm_skew(np.diag(w), 0.7)
        assert np.allclose(u, np.diag(np.exp(-1j * w * 0.7)), atol=1e-14)

    def test_against_scaling_and_squaring_oracle(self):
        rng = np.random.default_rng(7)
        for dim in (5, 20):
            for dt in (0.37, 2.0):
                h = random_hermitian(rng, dim, scale=3.0)
                mine = expm_skew(h, dt)
                oracle = scipy.linalg.expm(-1j * h * dt)
                assert np.abs(mine - oracle).max() < 1e-9

    def test_unitarity(self):
        rng = np.random.default_rng(11)
        h = random_hermitian(rng, 16, scale=10.0)
        u = expm_skew(h, 0.37)
        assert np.abs(u @ u.conj().T - np.eye(16)).max() < 1e-12
        assert np.allclose(u @ u.conj().T, u.conj().T @ u, atol=1e-12)

    def test_rejects_non_hermitian(self):
        m = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError, match="Hermitian"):
            expm_skew(m, 1.0)

    def test_rejects_negative_dt(self):
        with pytest.raises(ValueError):
            expm_skew(np.eye(2), -1.0)


@pytest.fixture(scope="module")
def device():
    return three_transmon_chain()


@pytest.fixture(scope="module")
def idle_schedule():
    return PulseSchedule(np.zeros((3, 50)), 1.0, (5.0, 6.0, 7.0))


class TestEvolve:
    def test_zero_duration_is_identity(self, device):
        sched = PulseSchedule(np.zeros((3, 0)), 1.0, (5.0, 6.0, 7.0))
        u = evolve(device, PiecewiseConstantWaveform(sched))
        assert np.array_equal(u, np.eye(20))

    def test_constant_waveform_equals_single_exponential(self, device):
        sched = PulseSchedule(np.zeros((3, 5)), 1.0, (5.0, 6.0, 7.0))
        u = evolve(device, PiecewiseConstantWaveform(sched))
        basis = basis_for(device)
        h = build_hamiltonian(device, basis, (5.0, 6.0, 7.0))
        assert np.abs(u - expm_skew(h, 5.0)).max() < 1e-10

    def test_unitarity_after_500_steps(self, device, idle_schedule):
        u = evolve(device, PiecewiseConstantWaveform(idle_schedule))
        assert np.abs(u @ u.conj().T - np.eye(20)).max() < 1e-8

    def test_excitation_block_structure(self, device, idle_schedule):
        basis = basis_for(device)
        u = evolve(device, PiecewiseConstantWaveform(idle_schedule))
        exc = np.array([sum(s) for s in basis.states])
        cross = exc[:, None] != exc[None, :]
        assert np.abs(u[cross]).max() < 1e-10

    def test_trotter_halving(self, device):
        rng = np.random.default_rng(3)
        det = np.cumsum(rng.uniform(-0.05, 0.05, size=(3, 10)), axis=1)
        sched = PulseSchedule(det, 1.0, (5.0, 6.0, 7.0))
        wf = PiecewiseConstantWaveform(sched)
        u1 = evolve(device, wf, TrotterConfig(0.1))
        u2 = evolve(device, wf, TrotterConfig(0.05))
        assert np.abs(u1 - u2).max() < 1e-4

    def test_full_space_agreement(self, device, idle_schedule):
        wf = PiecewiseConstantWaveform(idle_schedule)
        basis = basis_for(device)
        u20 = evolve(device, wf, basis=basis)
        u64 = evolve(device, wf, basis=full_basis(device))
        idx20 = computational_indices(basis)
        idx64 = computational_indices(full_basis(device))
        sub20 = u20[np.ix_(idx20, idx20)]
        sub64 = u64[np.ix_(idx64, idx64)]
        assert np.abs(sub20 - sub64).max() < 1e-3

    def test_idle_identity_fidelity(self, device, idle_schedule):
        # Park-point benchmark: all conditional-phase and leakage error the
        # chain model predicts for 50 ns at 5/6/7 GHz.  Pinned at the
        # computed model value; the headline >= 0.998 check lives in the
        # acceptance suite.
        u = evolve(device, PiecewiseConstantWaveform(idle_schedule))
        basis = basis_for(device)
        rep = fidelity_report(project_to_computational(u, basis), np.eye(8))
        assert rep.fidelity > 0.996
        assert rep.fidelity == pytest.approx(0.9963902, abs=2e-6)

    def test_singularity_names_time_and_qubit(self, device):
        det = np.zeros((3, 5))
        det[2, 3] = 1.2  # drives qubit R (7 GHz) onto the 8.2 GHz resonator
        sched = PulseSchedule(det, 1.0, (5.0, 6.0, 7.0))
        with pytest.raises(EvolutionError) as err:
            evolve(device, PiecewiseConstantWaveform(sched))
        assert err.value.transmon == 2
        assert 3.0 <= err.value.time <= 4.0

    def test_step_must_divide_duration(self, device, idle_schedule):
        with pytest.raises(ValueError, match="divide"):
            evolve(device, PiecewiseConstantWaveform(idle_schedule),
                   TrotterConfig(0.3))


class TestTrotterConfig:
    def test_validate_against_segment(self):
        TrotterConfig(0.1).validate_against(1.0)
        with pytest.raises(ValueError):
            TrotterConfig(0.3).validate_against(1.0)

    def test_positive_step(self):
        with pytest.raises(ValueError):
            TrotterConfig(0.0)
