"""Computational-subspace projection, phase compensation, and gate fidelity.

An evolved unitary on the truncated basis is projected to the 2**n
computational subspace (states with every transmon level <= 1, in binary
order).  Residual single-qubit Z phases are cancelled by a diagonal
compensation matrix

    M = e^{-i t0} diag over bitstrings b of exp(-i sum_k b_k t_k),

and the result is scored against a target with

    F = [Tr(U' U'^dag) + |Tr(T^dag U')|^2] / (d (d + 1)),   U' = U M.

The first term penalizes leakage out of the computational subspace (the
projection of a leaky unitary is a contraction), the second rewards
closeness to the target up to a global phase.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateUnitaryError

__all__ = [
    "controlled_phase_ideal",
    "ccphase_ideal",
    "computational_indices",
    "project_to_computational",
    "CompensationPhases",
    "compensation_matrix",
    "fit_phases",
    "gate_fidelity",
    "FidelityReport",
    "fidelity_report",
]


def controlled_phase_ideal(n_qubits=3):
    """diag(1, ..., 1, -1) on 2**n_qubits states: a -1 phase on |1...1> only."""
    d = 2 ** n_qubits
    u = np.eye(d, dtype=complex)
    u[-1, -1] = -1.0
    return u


def ccphase_ideal():
    """The ideal three-qubit controlled-controlled-phase gate (8x8)."""
    return controlled_phase_ideal(3)


def computational_indices(basis):
    """Basis indices of the qubit-like states, in binary order.

    The leftmost transmon is the most significant bit, so lexicographic
    basis ordering already yields binary order.
    """
    idx = [i for i, s in enumerate(basis.states) if max(s) <= 1]
    n = basis.n_transmons
    if len(idx) != 2 ** n:
        raise ValueError(
            f"basis holds {len(idx)} computational states, expected {2 ** n} "
            "(excitation cap below the qubit count?)"
        )
    return tuple(idx)


def project_to_computational(u, basis):
    """Submatrix of ``u`` on the computational states; sub-unitary if leaky."""
    idx = np.asarray(computational_indices(basis))
    return np.asarray(u)[np.ix_(idx, idx)]


@dataclass(frozen=True)
class CompensationPhases:
    """Global phase plus one Z phase per qubit (leftmost qubit first).

    For three qubits the per-qubit phases are, in basis-index terms, the
    phases of |100>, |010> and |001>, exposed as ``theta4``, ``theta2``
    and ``theta1``.
    """

    theta0: float
    qubit_phases: tuple

    def __post_init__(self):
        object.__setattr__(self, "qubit_phases", tuple(self.qubit_phases))

    @property
    def n_qubits(self):
        return len(self.qubit_phases)

    @property
    def theta1(self):
        return self.qubit_phases[-1]

    @property
    def theta2(self):
        return self.qubit_phases[-2]

    @property
    def theta4(self):
        return self.qubit_phases[-3]

    def reduced(self):
        """All phases wrapped to (-pi, pi]."""
        return CompensationPhases(
            _wrap(self.theta0), tuple(_wrap(t) for t in self.qubit_phases)
        )

    @classmethod
    def zero(cls, n_qubits=3):
        return cls(0.0, (0.0,) * n_qubits)


def _wrap(theta):
    """Reduce an angle mod 2*pi into (-pi, pi]."""
    wrapped = -((-theta + np.pi) % (2.0 * np.pi) - np.pi)
    return float(wrapped)


def _phase_exponents(n_qubits):
    """exponent[b, k] = bit k (from the left) of basis index b."""
    b = np.arange(2 ** n_qubits)
    shifts = np.arange(n_qubits - 1, -1, -1)
    return (b[:, None] >> shifts[None, :]) & 1


def compensation_matrix(phases):
    """Diagonal single-qubit Z compensation unitary of shape (2**n, 2**n)."""
    bits = _phase_exponents(phases.n_qubits)
    total = phases.theta0 + bits @ np.asarray(phases.qubit_phases)
    return np.diag(np.exp(-1j * total))


def _refine(u, target, theta_qubits, tol, max_rounds):
    """Exact coordinate ascent of |Tr(T^dag U M)| over the per-qubit phases.

    With all other phases fixed, the trace is A + B*exp(-i t_k), so each
    coordinate update is closed-form; the global phase drops out of the
    modulus and is left untouched.
    """
    n = len(theta_qubits)
    bits = _phase_exponents(n)
    # c[b] collects everything that multiplies the b-th compensation phase.
    c = (np.conj(target) * np.asarray(u)).sum(axis=0)
    theta = np.array(theta_qubits, dtype=float)
    for _ in range(max_rounds):
        moved = 0.0
        for k in range(n):
            m = np.exp(-1j * (bits @ theta))
            terms = c * m
            on = bits[:, k] == 1
            a = terms[~on].sum()
            b = (terms[on] * np.exp(1j * theta[k])).sum()
            if abs(a) < 1e-15 or abs(b) < 1e-15:
                continue
            new = float(np.angle(b) - np.angle(a))
            moved = max(moved, abs(_wrap(new - theta[k])))
            theta[k] = new
        if moved < tol:
            break
    return tuple(theta)


def fit_phases(u, target=None, refine=True, tol=1e-9, max_rounds=200):
    """Single-qubit compensation phases for a computational-subspace matrix.

    Closed form: the global phase is the argument of the |0...0> diagonal
    entry and each qubit phase is the argument of its one-excitation
    diagonal entry relative to that.  This is exact when ``u`` carries
    pure single-qubit phase structure; an optional coordinate-descent
    refinement then maximizes the gate fidelity against ``target``
    (default: the controlled-phase gate) to tolerance ``tol`` rad.

    Raises
    ------
    DegenerateUnitaryError
        If a needed diagonal entry is numerically zero.
    """
    u = np.asarray(u)
    d = u.shape[0]
    n = d.bit_length() - 1
    if u.shape != (d, d) or 2 ** n != d:
        raise ValueError(f"expected a square 2**n-dimensional matrix, got {u.shape}")
    anchor_indices = [0] + [2 ** (n - 1 - k) for k in range(n)]
    for i in anchor_indices:
        if abs(u[i, i]) < 1e-12:
            raise DegenerateUnitaryError(
                f"diagonal entry {i} is zero; its phase is undefined"
            )
    theta0 = float(np.angle(u[0, 0]))
    theta_qubits = tuple(
        float(np.angle(u[i, i])) - theta0 for i in anchor_indices[1:]
    )
    if refine:
        if target is None:
            target = controlled_phase_ideal(n)
        theta_qubits = _refine(u, target, theta_qubits, tol, max_rounds)
    return CompensationPhases(theta0, theta_qubits).reduced()


def _raw_fidelity(u, target):
    d = u.shape[0]
    tr_uu = np.trace(u @ u.conj().T).real
    tr_t = np.trace(target.conj().T @ u)
    return float((tr_uu + abs(tr_t) ** 2) / (d * (d + 1)))


def gate_fidelity(u, target, phases=None):
    """Gate fidelity of ``u`` against ``target`` after phase compensation.

    Parameters
    ----------
    u : ndarray
        Projected (possibly sub-unitary) computational-subspace matrix.
    target : ndarray
        Target unitary of the same dimension.
    phases : CompensationPhases, optional
        Compensation to apply; fitted from ``u`` (with refinement against
        ``target``) when omitted.  Pass ``CompensationPhases.zero()`` to
        score without compensation.
    """
    u = np.asarray(u, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if phases is None:
        phases = fit_phases(u, target=target)
    return _raw_fidelity(u @ compensation_matrix(phases), target)


@dataclass(frozen=True)
class FidelityReport:
    """Fidelity, fitted phases, and the compensated unitary."""

    fidelity: float
    phases: CompensationPhases
    compensated: np.ndarray

    def to_json(self):
        doc = {"schema_version": 1, "fidelity": self.fidelity,
               "theta0": self.phases.theta0}
        n = self.phases.n_qubits
        for k, theta in enumerate(self.phases.qubit_phases):
            doc[f"theta{2 ** (n - 1 - k)}"] = theta
        return doc


def fidelity_report(u, target, refine=True):
    """Fit compensation phases for ``u`` and score it against ``target``."""
    u = np.asarray(u, dtype=complex)
    target = np.asarray(target, dtype=complex)
    phases = fit_phases(u, target=target, refine=refine)
    compensated = u @ compensation_matrix(phases)
    fid = _raw_fidelity(compensated, target)
    if fid > 1.0 + 1e-12:
        raise ValueError(f"fidelity {fid} exceeds 1 beyond numerical tolerance")
    return FidelityReport(fid, phases, compensated)
