"""Trotterized closed-system time evolution.

The time-ordered evolution operator is approximated by a product of
short constant-Hamiltonian exponentials,

    U(T) = U_k ... U_1 U_0,   U_0 = I,   U_i = exp(-i H(tau_i) dt),

with the Hamiltonian rebuilt from the waveform sampled at the midpoint of
each Trotter step.  Each factor is computed by eigendecomposition: H is
exactly Hermitian and small, so this is both accurate and unitary to
machine precision.
"""

from dataclasses import dataclass

import numpy as np

from .device import basis_for, build_hamiltonian
from .errors import EvolutionError, SingularityError

__all__ = ["TrotterConfig", "expm_skew", "evolve"]


@dataclass(frozen=True)
class TrotterConfig:
    """Fixed-step Trotterization parameters (step in ns)."""

    step: float = 0.1

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")

    def n_steps(self, duration):
        """Number of steps covering ``duration``; must divide evenly."""
        k = int(round(duration / self.step))
        if k < 0 or abs(k * self.step - duration) > 1e-9:
            raise ValueError(
                f"step {self.step} ns does not divide duration {duration} ns evenly"
            )
        return k

    def validate_against(self, segment_duration):
        steps = round(segment_duration / self.step)
        if steps < 1 or abs(steps * self.step - segment_duration) > 1e-9:
            raise ValueError(
                f"step {self.step} ns does not divide segment duration "
                f"{segment_duration} ns evenly"
            )


def expm_skew(h, dt, herm_tol=1e-12):
    """exp(-i*h*dt) for Hermitian h (rad/ns) and dt (ns), via eigendecomposition.

    Raises ValueError if h deviates from Hermiticity beyond ``herm_tol``
    relative to its largest entry.
    """
    h = np.asarray(h)
    scale = max(1.0, np.abs(h).max(initial=0.0))
    if np.abs(h - h.conj().T).max(initial=0.0) > herm_tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


# Step unitaries are pure functions of (device, basis, dt, frequencies);
# sharing them across calls makes single-segment pulse edits (local search)
# and repeated evaluations of the same schedule cheap.
_STEP_CACHE = {}
_STEP_CACHE_CAP = 2048


def step_unitary(device, basis, frequencies, dt):
    """Cached exp(-i H dt) for one frequency sample."""
    key = (device, basis, dt, frequencies.tobytes())
    u = _STEP_CACHE.get(key)
    if u is None:
        h = build_hamiltonian(device, basis, frequencies)
        u = expm_skew(h, dt)
        if len(_STEP_CACHE) >= _STEP_CACHE_CAP:
            _STEP_CACHE.pop(next(iter(_STEP_CACHE)))
        _STEP_CACHE[key] = u
    return u


def evolve(device, waveform, trotter=TrotterConfig(), basis=None):
    """Total unitary of a waveform on the device's truncated basis.

    Parameters
    ----------
    device : DeviceChain
    waveform : Waveform
        Absolute per-qubit frequencies over [0, duration].
    trotter : TrotterConfig
    basis : TruncatedBasis, optional
        Defaults to the device's excitation-truncated working basis; pass
        the full product basis to evolve without truncation.

    Returns
    -------
    ndarray
        Unitary of shape (dim, dim).  Identical frequency samples share
        one matrix exponential, so piecewise-constant waveforms cost one
        eigendecomposition per segment.
    """
    if basis is None:
        basis = basis_for(device)
    k = trotter.n_steps(waveform.duration)
    dim = basis.dimension
    u = np.eye(dim, dtype=complex)
    # Consecutive steps with identical frequency samples share one constant
    # Hamiltonian, so their product is a single (exact) exponential.
    run_freqs, run_key, run_count, run_start = None, None, 0, 0.0
    samples = []
    for i in range(k):
        t_mid = (i + 0.5) * trotter.step
        freqs = np.asarray(waveform.frequencies(t_mid), dtype=float)
        key = freqs.tobytes()
        if key == run_key:
            run_count += 1
        else:
            if run_count:
                samples.append((run_freqs, run_count, run_start))
            run_freqs, run_key, run_count, run_start = freqs, key, 1, t_mid
    if run_count:
        samples.append((run_freqs, run_count, run_start))
    for freqs, count, t_start in samples:
        try:
            step_u = step_unitary(device, basis, freqs, count * trotter.step)
        except SingularityError as err:
            raise EvolutionError(
                f"singular Hamiltonian at t={t_start} ns (transmon "
                f"{err.transmon}): {err}",
                time=t_start,
                transmon=err.transmon,
            ) from err
        u = step_u @ u
    return u
