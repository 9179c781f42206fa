"""Learn a desk-scale controlled-phase pulse on the two-transmon toy chain.

The toy parks both qubits on the |11>-|02> avoided crossing, where a
10 ns window is enough to collect the conditional pi phase.  The search
runs in two stages, mirroring the production pipeline: greedy
self-adaptive differential evolution over feasible detuning sequences,
then the windowed +/-eps local refinement.  A fuller version of this run
(200 generations, 10 refinement iterations) produced the pulse shipped at
``fluxgate/data/toy_cz_pulse.json``.

CLI equivalent:
    fluxgate optimize --device demos/configs/toy_chain.json \
        --constraints demos/configs/toy_constraints.json \
        --de-config demos/configs/toy_de.json \
        --local-search demos/configs/toy_local_search.json \
        --segments 10 --out pulses.csv --log history.csv
"""

from fluxgate.optimizer import (
    DEConfig,
    LocalSearchConfig,
    ccphase_fitness,
    local_search,
    run_sussade,
    seed_population,
)
from fluxgate.profiles import TOY_REFERENCES, toy_constraints, \
    toy_two_transmon_chain

device = toy_two_transmon_chain()
constraints = toy_constraints()
fitness = ccphase_fitness(device, TOY_REFERENCES, segment_duration=1.0)

config = DEConfig(population_size=32, max_generations=60,
                  target_fidelity=0.99, seed=2024)
population = seed_population(config, constraints, TOY_REFERENCES, n_segments=10)
result = run_sussade(fitness, config, constraints, TOY_REFERENCES,
                     population=population)

print("generation  best       mean")
for rec in result.history[:: max(1, len(result.history) // 12)]:
    print(f"{rec.generation:10d}  {rec.best_fidelity:.6f}  "
          f"{rec.mean_fidelity:.6f}")
print(f"\nevolution finished at F = {result.best_fidelity:.6f} "
      f"({result.history[-1].evaluations} evaluations)")

# One quick refinement pass with a coarsened step ladder; the shipped pulse
# used the full ladder down to 1 kHz.
refined = local_search(
    result.best_chromosome, fitness,
    LocalSearchConfig(eps_max=0.1, eps_min=1e-4, target_fidelity=0.9995,
                      max_iterations=1),
    constraints, TOY_REFERENCES,
)
print(f"local search:   F = {refined.fidelity:.6f} "
      f"({refined.iterations} iterations)")
print("detunings (GHz):")
for k, row in enumerate(refined.chromosome.reshape(2, 10)):
    print(f"  qubit {k}: " + " ".join(f"{v:+.3f}" for v in row))
