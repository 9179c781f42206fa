"""Stress the learned toy pulse: Erf smoothing and uniform random noise.

Control electronics round off programmed steps; the first-order model
replaces each step with an error-function ramp centred on the segment
boundary.  Separately, each (qubit, segment) detuning receives i.i.d.
uniform noise scaled by an amplitude in MHz, and the mean gate fidelity
is tracked as the amplitude grows.  The sweep is fully deterministic
under its master seed.

CLI equivalent:
    fluxgate robustness --device demos/configs/toy_chain.json \
        --pulses pulse.json --amplitudes 0:10:1 --samples 200 --seed 1 \
        --out robustness.csv
"""

from fluxgate import (
    NoiseSweepConfig,
    SmoothingParams,
    controlled_phase_ideal,
    distortion_report,
    noise_sweep,
)
from fluxgate.profiles import load_toy_pulse, toy_two_transmon_chain

device = toy_two_transmon_chain()
pulse = load_toy_pulse()
target = controlled_phase_ideal(2)

print("Erf-smoothing distortion:")
for t_ramp in (0.25, 0.5, 1.0):
    rep = distortion_report(pulse, device, target=target,
                            params=SmoothingParams(t_ramp=t_ramp))
    print(f"  t_ramp={t_ramp:4.2f} ns: baseline {rep.baseline_fidelity:.6f}"
          f"  smoothed {rep.smoothed_fidelity:.6f}  delta {rep.delta:+.6f}")

config = NoiseSweepConfig(
    amplitudes_mhz=tuple(float(a) for a in range(11)), samples=200, seed=1,
)
report = noise_sweep(pulse, device, config, target=target)
print(f"\nnoise sweep ({config.samples} samples per amplitude):")
print(f"{'amplitude_mhz':>14s}  {'mean_fidelity':>13s}  {'std_error':>10s}")
for amp, mean, err in report.rows():
    print(f"{amp:14.1f}  {mean:13.6f}  {err:10.2e}")
