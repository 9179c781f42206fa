"""Density-matrix evolution and simulated quantum process tomography.

Evolution runs on the full (untruncated) product space of dimension
levels**n.  Without decoherence the density matrix is conjugated by the
same Trotter-step unitaries the closed-system propagator uses.  With
decoherence, each step applies a symmetric (Strang) split:

    rho -> U_half rho U_half^dag
    rho -> rho + dt * D(rho)
    rho -> U_half rho U_half^dag

where D is the Lindblad dissipator built from per-transmon relaxation
operators sqrt(1/T1) * a (a = sum_j sqrt(j+1) |j><j+1|) and pure-dephasing
operators sqrt(2/T_phi) * n (n = sum_j j |j><j|), with the standard
relation 1/T_phi = 1/T2 - 1/(2 T1).  On the qubit block this reproduces
coherence decay at exactly 1/T2.  Rates are time-constant (coherence is
assumed flux-independent).

Tomography follows the standard prepare-evolve-invert recipe: the 4**n
product preparations {I, Rx(pi/2), Ry(pi/2), Rx(pi)} applied to |0...0>
span the computational operator space; linear inversion of the evolved
pairs yields the process matrix chi in the n-qubit Pauli basis, which is
then projected to the nearest Hermitian PSD trace-one matrix.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .device import full_basis
from .errors import TomographyError
from .fidelity import (
    computational_indices,
    controlled_phase_ideal,
    fidelity_report,
    project_to_computational,
)
from .propagator import TrotterConfig, evolve
from .pulses import PiecewiseConstantWaveform, PulseSchedule

__all__ = [
    "LindbladSpec",
    "validate_density",
    "lowering_operator",
    "number_operator",
    "evolve_density",
    "prepare_qpt_inputs",
    "pauli_basis",
    "estimate_chi",
    "chi_ideal",
    "QPTReport",
    "qpt_metrics",
    "QptResult",
    "run_qpt",
]

US_TO_NS = 1000.0


@dataclass(frozen=True)
class LindbladSpec:
    """Per-transmon relaxation (T1) and coherence (T2) times in microseconds.

    Scalars broadcast over the chain.  Requires T2 <= 2*T1 per transmon,
    otherwise the pure-dephasing time T_phi is undefined.
    """

    t1_us: object = 20.0
    t2_us: object = 20.0

    def per_transmon(self, n):
        t1 = self.t1_us if isinstance(self.t1_us, (tuple, list)) else (self.t1_us,) * n
        t2 = self.t2_us if isinstance(self.t2_us, (tuple, list)) else (self.t2_us,) * n
        if len(t1) != n or len(t2) != n:
            raise ValueError(f"need {n} T1/T2 values, got {len(t1)}/{len(t2)}")
        for k, (a, b) in enumerate(zip(t1, t2)):
            if a <= 0 or b <= 0:
                raise ValueError(f"transmon {k}: T1 and T2 must be positive")
            if b > 2 * a:
                raise ValueError(
                    f"transmon {k}: T2={b} us exceeds 2*T1={2 * a} us; "
                    "pure dephasing time undefined"
                )
        return tuple(float(v) for v in t1), tuple(float(v) for v in t2)

    def rates_per_ns(self, n):
        """(relaxation, pure-dephasing) rate pairs in 1/ns."""
        t1, t2 = self.per_transmon(n)
        out = []
        for a, b in zip(t1, t2):
            g1 = 1.0 / (a * US_TO_NS) if math.isfinite(a) else 0.0
            inv_t2 = 1.0 / (b * US_TO_NS) if math.isfinite(b) else 0.0
            gphi = max(inv_t2 - 0.5 * g1, 0.0)
            out.append((g1, gphi))
        return tuple(out)


def validate_density(rho, herm_tol=1e-10, trace_tol=1e-8, eig_floor=-1e-8):
    """Raise ValueError unless rho is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {np.trace(rho)} != 1")
    if np.linalg.eigvalsh(rho).min() < eig_floor:
        raise ValueError("density matrix has a negative eigenvalue")


def lowering_operator(levels):
    """a = sum_j sqrt(j+1)|j><j+1| on one qudit."""
    return np.diag(np.sqrt(np.arange(1, levels)).astype(complex), k=1)


def number_operator(levels):
    """n = sum_j j|j><j| on one qudit."""
    return np.diag(np.arange(levels).astype(complex))


def _embed(op, position, n, levels):
    full = np.array([[1.0 + 0.0j]])
    for k in range(n):
        factor = op if k == position else np.eye(levels, dtype=complex)
        full = np.kron(full, factor)
    return full


def _collapse_operators(device, lindblad):
    n = device.n_transmons
    levels = device.levels_per_transmon
    ops = []
    for k, (g1, gphi) in enumerate(lindblad.rates_per_ns(n)):
        if g1 > 0:
            ops.append(np.sqrt(g1) * _embed(lowering_operator(levels), k, n, levels))
        if gphi > 0:
            ops.append(
                np.sqrt(2.0 * gphi) * _embed(number_operator(levels), k, n, levels)
            )
    return ops


def _step_unitaries(device, waveform, trotter, basis, dt):
    """One unitary per Trotter step (shared for identical frequency samples)."""
    from .propagator import step_unitary

    k = trotter.n_steps(waveform.duration)
    out = []
    for i in range(k):
        t_mid = (i + 0.5) * trotter.step
        freqs = np.asarray(waveform.frequencies(t_mid), dtype=float)
        out.append(step_unitary(device, basis, freqs, dt))
    return out


def _dissipator(rho, ops, anticomm):
    out = -0.5 * (anticomm @ rho + rho @ anticomm)
    for op in ops:
        out += op @ rho @ op.conj().T
    return out


def evolve_density(rho0, device, waveform, trotter=TrotterConfig(), lindblad=None,
                   validate=True):
    """Evolve a density matrix on the full product space.

    Parameters
    ----------
    rho0 : ndarray
        Initial density matrix of dimension levels**n.
    device : DeviceChain
    waveform : Waveform
    trotter : TrotterConfig
        Also sets the fixed integration step for the dissipator.
    lindblad : LindbladSpec, optional
        Decoherence model; omitted means purely unitary conjugation.
    validate : bool
        Check the density-matrix invariants of ``rho0`` on entry.
    """
    basis = full_basis(device)
    dim = basis.dimension
    rho = np.array(rho0, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(
            f"expected a {dim}x{dim} density matrix for the full space, "
            f"got {rho.shape}"
        )
    if validate:
        validate_density(rho)
    dt = trotter.step
    if lindblad is None:
        for u in _step_unitaries(device, waveform, trotter, basis, dt):
            rho = u @ rho @ u.conj().T
        return rho
    ops = _collapse_operators(device, lindblad)
    anticomm = sum((op.conj().T @ op for op in ops), np.zeros((dim, dim), complex))
    halves = _step_unitaries(device, waveform, trotter, basis, 0.5 * dt)
    for u in halves:
        ud = u.conj().T
        rho = u @ rho @ ud
        rho = rho + dt * _dissipator(rho, ops, anticomm)
        rho = u @ rho @ ud
    return rho


def _qubit_rotations():
    c = 1.0 / np.sqrt(2.0)
    rx_half = np.array([[c, -1j * c], [-1j * c, c]])
    ry_half = np.array([[c, -c], [c, c]], dtype=complex)
    rx_pi = np.array([[0.0, -1.0j], [-1.0j, 0.0]])
    return [np.eye(2, dtype=complex), rx_half, ry_half, rx_pi]


def prepare_qpt_inputs(n_qubits=3, levels=4):
    """The 4**n tomography input states as full-space density matrices.

    Each preparation applies one of {I, Rx(pi/2), Ry(pi/2), Rx(pi)} per
    qubit (acting on the {|0>,|1>} block, identity on higher levels) to
    |0...0>.  Enumeration is base 4 with the leftmost qubit as the most
    significant digit.
    """
    rots = _qubit_rotations()
    embedded = []
    for r in rots:
        op = np.eye(levels, dtype=complex)
        op[:2, :2] = r
        embedded.append(op)
    inputs = []
    for digits in product(range(4), repeat=n_qubits):
        psi = np.zeros(levels ** n_qubits, dtype=complex)
        psi[0] = 1.0
        prep = np.array([[1.0 + 0.0j]])
        for d in digits:
            prep = np.kron(prep, embedded[d])
        psi = prep @ psi
        inputs.append(np.outer(psi, psi.conj()))
    return inputs


_PAULI_1 = [
    np.eye(2, dtype=complex),
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
]


def pauli_basis(n_qubits):
    """All 4**n Pauli products (I, X, Y, Z per qubit, leftmost first)."""
    ops = []
    for digits in product(range(4), repeat=n_qubits):
        p = np.array([[1.0 + 0.0j]])
        for d in digits:
            p = np.kron(p, _PAULI_1[d])
        ops.append(p)
    return np.array(ops)


def estimate_chi(inputs, outputs, cond_limit=1e10):
    """Process matrix from matched input/output computational-subspace pairs.

    Linear inversion of E(rho) = sum_mn chi_mn P_m rho P_n^dag over the
    Pauli basis, followed by projection to the nearest (Frobenius)
    Hermitian PSD trace-one matrix via eigenvalue clipping and rescaling.

    Raises
    ------
    TomographyError
        If the input set does not span the operator space.
    """
    if len(inputs) != len(outputs):
        raise ValueError("inputs and outputs must pair up")
    d = np.asarray(inputs[0]).shape[0]
    d2 = d * d
    if len(inputs) < d2:
        raise TomographyError(
            f"{len(inputs)} input states cannot span a {d2}-dimensional "
            "operator space"
        )
    a = np.column_stack([np.asarray(r, dtype=complex).reshape(-1) for r in inputs])
    b = np.column_stack([np.asarray(r, dtype=complex).reshape(-1) for r in outputs])
    if np.linalg.cond(a) > cond_limit:
        raise TomographyError("tomography input set is rank deficient")
    # Superoperator on row-major vectorized operators: S vec(rho) = vec(E(rho)).
    s = np.linalg.solve(a.T, b.T).T
    n_qubits = round(math.log2(d))
    paulis = pauli_basis(n_qubits)
    t4 = s.reshape(d, d, d, d).transpose(0, 2, 1, 3)
    chi = np.einsum("mik,ikjl,njl->mn", paulis.conj(), t4, paulis) / d2
    chi = 0.5 * (chi + chi.conj().T)
    w, v = np.linalg.eigh(chi)
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 0:
        raise TomographyError("estimated process matrix has no positive weight")
    return (v * (w / total)) @ v.conj().T


def chi_ideal(u):
    """Rank-one process matrix of the unitary channel rho -> u rho u^dag."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    n_qubits = round(math.log2(d))
    paulis = pauli_basis(n_qubits)
    coeff = np.einsum("mji,ji->m", paulis.conj(), u) / d
    return np.outer(coeff, coeff.conj())


@dataclass(frozen=True)
class QPTReport:
    """Process fidelity, average gate fidelity, and average purity."""

    process_fidelity: float
    average_gate_fidelity: float
    average_purity: float

    def to_json(self):
        return {
            "process_fidelity": self.process_fidelity,
            "average_gate_fidelity": self.average_gate_fidelity,
            "average_purity": self.average_purity,
        }


def qpt_metrics(chi, chi_target):
    """Channel metrics from a process matrix and its target.

    F_p = Tr(chi_target chi); F_g = (d F_p + 1)/(d + 1); the average
    purity is (d Tr(chi^2) + 1)/(d + 1), all with d the Hilbert-space
    dimension.
    """
    chi = np.asarray(chi)
    d = round(math.sqrt(chi.shape[0]))
    fp = float(np.trace(chi_target @ chi).real)
    fg = (d * fp + 1.0) / (d + 1.0)
    purity = (d * float(np.trace(chi @ chi).real) + 1.0) / (d + 1.0)
    return QPTReport(fp, fg, purity)


def _embed_compensation(phases, n_qubits, levels):
    """Per-qubit Z compensation lifted to the full space (|1> level only)."""
    full = np.array([1.0 + 0.0j])
    for theta in phases.qubit_phases:
        factor = np.ones(levels, dtype=complex)
        factor[1] = np.exp(-1j * theta)
        full = np.kron(full, factor)
    return full  # diagonal as a vector; global phase drops out of rho -> M rho M^dag


@dataclass(frozen=True)
class QptResult:
    chi: np.ndarray
    report: QPTReport
    phases: object
    closed_system_fidelity: float


def run_qpt(device, schedule, trotter=TrotterConfig(), lindblad=None, target=None,
            levels=None, compensation=None, threads=1):
    """Full tomography of a pulse: evolve the 4**n preparations and invert.

    The single-qubit phase compensation is fitted from a closed-system run
    of the same pulse (unless ``compensation`` phases are given) and
    applied as a virtual-Z conjugation of the input states, so the
    characterized channel is the compensated gate.  Leakage out of the
    computational subspace appears as trace loss absorbed by the PSD
    projection inside :func:`estimate_chi`.

    Parameters
    ----------
    device : DeviceChain
    schedule : PulseSchedule or Waveform
    trotter : TrotterConfig
    lindblad : LindbladSpec, optional
    target : ndarray, optional
        Target gate on the computational subspace (default: the
        controlled-phase gate on n qubits).
    levels : int, optional
        Override the device's levels_per_transmon for this run.
    compensation : CompensationPhases, optional
    """
    if levels is not None and levels != device.levels_per_transmon:
        device = device.with_levels(levels)
    n = device.n_transmons
    lv = device.levels_per_transmon
    if target is None:
        target = controlled_phase_ideal(n)
    waveform = (
        PiecewiseConstantWaveform(schedule)
        if isinstance(schedule, PulseSchedule)
        else schedule
    )

    from .device import basis_for

    working = basis_for(device)
    u_closed = evolve(device, waveform, trotter, basis=working)
    rep = fidelity_report(project_to_computational(u_closed, working), target)
    phases = compensation if compensation is not None else rep.phases

    comp_diag = _embed_compensation(phases, n, lv)
    inputs = prepare_qpt_inputs(n, lv)
    fb = full_basis(device)
    if lindblad is None:
        u_full = evolve(device, waveform, trotter, basis=fb)

        def one(rho):
            comp = comp_diag[:, None] * rho * comp_diag.conj()[None, :]
            return u_full @ comp @ u_full.conj().T
    else:
        # Warm the shared step cache once so concurrent runs reuse it.
        _step_unitaries(device, waveform, trotter, fb, 0.5 * trotter.step)

        def one(rho):
            comp = comp_diag[:, None] * rho * comp_diag.conj()[None, :]
            return evolve_density(
                comp, device, waveform, trotter, lindblad, validate=False
            )

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(one, inputs))
    else:
        outputs = [one(rho) for rho in inputs]
    idx = np.asarray(computational_indices(fb))
    sel = np.ix_(idx, idx)
    chi = estimate_chi([r[sel] for r in inputs], [r[sel] for r in outputs])
    report = qpt_metrics(chi, chi_ideal(target))
    return QptResult(chi, report, phases, rep.fidelity)
