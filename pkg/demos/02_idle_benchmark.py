"""Score the park point: 50 ns at the idle frequencies against identity.

With all qubits parked at 5/6/7 GHz the always-on exchange couplings
still dress the spectrum, so a 50 ns wait is not a perfect identity:
single-qubit phases (cancelled by the compensation fit) ride on top of
small conditional-phase shifts and residual leakage that no single-qubit
compensation can remove.  This script separates those contributions.

CLI equivalent:
    fluxgate simulate --device demos/configs/three_transmon_chain.json \
        --pulses idle.csv --target identity --out report.json
"""

import numpy as np

from fluxgate import (
    PiecewiseConstantWaveform,
    PulseSchedule,
    basis_for,
    evolve,
    fidelity_report,
    project_to_computational,
)
from fluxgate.profiles import three_transmon_chain

device = three_transmon_chain()
schedule = PulseSchedule(np.zeros((3, 50)), 1.0, (5.0, 6.0, 7.0))

u = evolve(device, PiecewiseConstantWaveform(schedule))
basis = basis_for(device)
u8 = project_to_computational(u, basis)

leak = 8.0 - np.trace(u8 @ u8.conj().T).real
print(f"leakage out of the computational subspace: {leak:.6f}")

phases = np.angle(np.diag(u8))
wrap = lambda x: float(np.angle(np.exp(1j * x)))
print("conditional phases after 50 ns (rad):")
print(f"  L-M: {wrap(phases[6] - phases[4] - phases[2] + phases[0]):+.4f}")
print(f"  M-R: {wrap(phases[3] - phases[2] - phases[1] + phases[0]):+.4f}")
print(f"  L-R: {wrap(phases[5] - phases[4] - phases[1] + phases[0]):+.4f}")

closed_form = fidelity_report(u8, np.eye(8), refine=False)
refined = fidelity_report(u8, np.eye(8))
print(f"\nidentity fidelity, closed-form compensation: "
      f"{closed_form.fidelity:.6f}")
print(f"identity fidelity, refined compensation:     {refined.fidelity:.6f}")
print("fitted phases (rad):", [round(t, 4) for t in refined.phases.qubit_phases])
