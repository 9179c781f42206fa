"""Effective Hamiltonian of a chain of resonator-coupled transmons.

The model is a linear chain of weakly anharmonic transmons, each coupled
to its nearest neighbour through a bus resonator that is never populated.
Adiabatic elimination of the resonators leaves an effective qudit chain:
each transmon keeps its lowest ``levels_per_transmon`` levels, transition
frequencies are dressed by the dispersive Lamb shift, and neighbouring
transmons exchange single excitations with a resonator-mediated strength.

Unit convention
---------------
All configuration values (transmon frequencies, anharmonicities, coupling
strengths, resonator frequencies) are plain frequencies in GHz.  Operators
returned by :func:`build_hamiltonian` are in angular units, rad/ns, i.e.
every GHz value is multiplied by 2*pi on entry into a matrix.  Time is
measured in ns throughout the library, so ``exp(-i H t)`` needs no further
conversion factors.
"""

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import SingularityError

TWO_PI = 2.0 * np.pi

__all__ = [
    "TransmonSpec",
    "ResonatorCoupling",
    "DeviceChain",
    "TruncatedBasis",
    "enumerate_basis",
    "basis_for",
    "full_basis",
    "dressed_frequency",
    "coupling_strength",
    "build_hamiltonian",
    "device_from_json",
    "device_to_json",
    "load_device",
]


@dataclass(frozen=True)
class TransmonSpec:
    """Static parameters of one transmon in the chain.

    Parameters
    ----------
    index : int
        0-based position in the chain.
    bare_frequency : float
        Bare |0>-|1> transition frequency in GHz.
    anharmonicity : float
        Level-spacing deviation in GHz; negative in the transmon regime.
    idle_frequency : float, optional
        Pre-gate park frequency in GHz, used by boundary constraints.
        Defaults to the bare frequency.
    """

    index: int
    bare_frequency: float
    anharmonicity: float
    idle_frequency: float = None

    def __post_init__(self):
        if self.bare_frequency <= 0:
            raise ValueError(
                f"transmon {self.index}: bare_frequency must be positive, "
                f"got {self.bare_frequency}"
            )
        if self.idle_frequency is None:
            object.__setattr__(self, "idle_frequency", self.bare_frequency)


@dataclass(frozen=True)
class ResonatorCoupling:
    """Bus resonator linking transmons ``left_index`` and ``left_index + 1``.

    ``g_left`` and ``g_right`` are the coupling strengths (GHz) of the left
    and right transmon to this resonator; ``resonator_frequency`` is the bus
    frequency in GHz.
    """

    left_index: int
    right_index: int
    resonator_frequency: float
    g_left: float
    g_right: float

    def __post_init__(self):
        if self.right_index != self.left_index + 1:
            raise ValueError(
                "resonator couplings must link nearest neighbours: got "
                f"({self.left_index}, {self.right_index})"
            )

    def g_for(self, transmon_index):
        """Coupling strength seen by one of the two attached transmons."""
        if transmon_index == self.left_index:
            return self.g_left
        if transmon_index == self.right_index:
            return self.g_right
        raise ValueError(
            f"transmon {transmon_index} is not attached to resonator "
            f"({self.left_index}, {self.right_index})"
        )


def _as_tuple(seq):
    return seq if isinstance(seq, tuple) else tuple(seq)


@dataclass(frozen=True)
class DeviceChain:
    """A linear chain of transmons with nearest-neighbour resonator buses.

    ``levels_per_transmon`` is the per-transmon truncation (4 by default,
    3 supported) and ``max_total_excitation`` caps the total excitation
    number kept in the working basis.  ``dispersive_floor`` (GHz) is the
    minimum allowed distance of any modelled transition from a resonator
    pole; constructions and evolutions that get closer raise
    :class:`~fluxgate.errors.SingularityError`.
    """

    transmons: tuple
    couplings: tuple
    levels_per_transmon: int = 4
    max_total_excitation: int = 3
    dispersive_floor: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "transmons", _as_tuple(self.transmons))
        object.__setattr__(self, "couplings", _as_tuple(self.couplings))
        n = len(self.transmons)
        if n < 1:
            raise ValueError("chain needs at least one transmon")
        if len(self.couplings) != n - 1:
            raise ValueError(
                f"expected {n - 1} couplings for {n} transmons, "
                f"got {len(self.couplings)}"
            )
        for k, t in enumerate(self.transmons):
            if t.index != k:
                raise ValueError(f"transmon at position {k} has index {t.index}")
        for k, c in enumerate(self.couplings):
            if c.left_index != k:
                raise ValueError(
                    f"coupling at position {k} links ({c.left_index}, "
                    f"{c.right_index}); chain order requires left_index == {k}"
                )
        if not 2 <= self.levels_per_transmon <= 4:
            raise ValueError(
                f"levels_per_transmon must be 2..4, got {self.levels_per_transmon}"
            )
        cap = n * (self.levels_per_transmon - 1)
        if not 1 <= self.max_total_excitation <= cap:
            raise ValueError(
                f"max_total_excitation must be 1..{cap}, "
                f"got {self.max_total_excitation}"
            )
        if self.levels_per_transmon >= 3:
            for t in self.transmons:
                if t.anharmonicity == 0:
                    raise ValueError(
                        f"transmon {t.index}: zero anharmonicity degenerates the "
                        "level spacing once levels j >= 2 are modelled"
                    )
        self._check_dispersive_floor()

    def _check_dispersive_floor(self):
        # Static guard: bare and idle frequencies of every attached transmon
        # must keep all modelled transitions clear of each resonator pole.
        for c in self.couplings:
            for k in (c.left_index, c.right_index):
                t = self.transmons[k]
                for f in {t.bare_frequency, t.idle_frequency}:
                    for j in range(self.levels_per_transmon):
                        gap = f + j * t.anharmonicity - c.resonator_frequency
                        if abs(gap) <= self.dispersive_floor:
                            raise SingularityError(
                                f"transmon {k} at {f} GHz, level offset j={j} is "
                                f"within {self.dispersive_floor} GHz of resonator "
                                f"{c.resonator_frequency} GHz",
                                transmon=k,
                                level=j,
                                resonator_frequency=c.resonator_frequency,
                            )

    @property
    def n_transmons(self):
        return len(self.transmons)

    def adjacent_couplings(self, transmon_index):
        """Resonators attached to one transmon (one at the ends, two inside)."""
        return tuple(
            c
            for c in self.couplings
            if transmon_index in (c.left_index, c.right_index)
        )

    def idle_frequencies(self):
        return tuple(t.idle_frequency for t in self.transmons)

    def bare_frequencies(self):
        return tuple(t.bare_frequency for t in self.transmons)

    def with_levels(self, levels_per_transmon, max_total_excitation=None):
        """A copy of this chain truncated to a different level count."""
        if max_total_excitation is None:
            cap = self.n_transmons * (levels_per_transmon - 1)
            max_total_excitation = min(self.max_total_excitation, cap)
        return DeviceChain(
            self.transmons,
            self.couplings,
            levels_per_transmon=levels_per_transmon,
            max_total_excitation=max_total_excitation,
            dispersive_floor=self.dispersive_floor,
        )


@dataclass(frozen=True)
class TruncatedBasis:
    """Ordered multi-transmon occupation states with a total-excitation cap.

    States are tuples of per-transmon levels, lexicographically ascending,
    which for qubit-like states coincides with binary ordering (leftmost
    transmon most significant).
    """

    states: tuple
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "states", _as_tuple(self.states))
        object.__setattr__(
            self, "_index", {s: i for i, s in enumerate(self.states)}
        )

    @property
    def dimension(self):
        return len(self.states)

    @property
    def n_transmons(self):
        return len(self.states[0])

    def index_of(self, state):
        return self._index[tuple(state)]

    def __contains__(self, state):
        return tuple(state) in self._index

    def occupations(self):
        """States as an integer array of shape (dimension, n_transmons)."""
        return np.array(self.states, dtype=np.intp)


def enumerate_basis(n, j_max, e_max):
    """All occupation vectors with levels below ``j_max`` and total <= ``e_max``.

    Parameters
    ----------
    n : int
        Number of transmons (>= 1).
    j_max : int
        Levels per transmon (>= 2); levels run 0..j_max-1.
    e_max : int
        Total-excitation cap (>= 1).

    Returns
    -------
    TruncatedBasis
        Lexicographically ordered basis.  For (3, 4, 3) this is the
        20-state manifold used for three-transmon gate simulations.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if j_max < 2:
        raise ValueError(f"j_max must be >= 2, got {j_max}")
    if e_max < 1:
        raise ValueError(f"e_max must be >= 1, got {e_max}")
    states = tuple(
        s for s in itertools.product(range(j_max), repeat=n) if sum(s) <= e_max
    )
    return TruncatedBasis(states)


def basis_for(device):
    """The device's working basis (excitation-truncated)."""
    return enumerate_basis(
        device.n_transmons, device.levels_per_transmon, device.max_total_excitation
    )


def full_basis(device):
    """The untruncated product basis of dimension levels**n."""
    n = device.n_transmons
    levels = device.levels_per_transmon
    return enumerate_basis(n, levels, n * (levels - 1))


def dressed_frequency(transmon, level, current_frequency, adjacent_resonators,
                      dispersive_floor=0.1):
    """Dressed energy of one transmon level, in GHz.

    The energy of level ``j`` at qubit frequency ``f`` is

        j*f + (delta/2)*(j-1)*j + sum_r j*g_r^2 / (f - w_r + (j-1)*delta)

    with one Lamb-shift term per attached resonator (one at the chain ends,
    two in the middle).

    Parameters
    ----------
    transmon : TransmonSpec
    level : int
        Level index j, 0 <= j < levels_per_transmon.
    current_frequency : float
        The instantaneous qubit frequency in GHz (flux tuning moves it away
        from the bare value).
    adjacent_resonators : sequence of ResonatorCoupling
        The resonators attached to this transmon.
    dispersive_floor : float
        Minimum allowed |denominator| in GHz before a SingularityError.

    Returns
    -------
    float
        Dressed energy in GHz (0 for j = 0: every term carries a factor j).
    """
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    j = int(level)
    if j == 0:
        return 0.0
    delta = transmon.anharmonicity
    f = current_frequency
    value = j * f + 0.5 * delta * (j - 1) * j
    for c in adjacent_resonators:
        g = c.g_for(transmon.index)
        den = f - c.resonator_frequency + (j - 1) * delta
        if abs(den) <= dispersive_floor:
            raise SingularityError(
                f"transmon {transmon.index} level {j} at {f} GHz is within "
                f"{dispersive_floor} GHz of resonator "
                f"{c.resonator_frequency} GHz",
                transmon=transmon.index,
                level=j,
                resonator_frequency=c.resonator_frequency,
            )
        value += j * g * g / den
    return value


def coupling_strength(left, j_left, right, j_right, coupling,
                      left_frequency=None, right_frequency=None,
                      dispersive_floor=0.1):
    """Resonator-mediated exchange coupling J between two level pairs, GHz.

    Symmetric under swapping the two transmons together with their levels.

    Parameters
    ----------
    left, right : TransmonSpec
        The two coupled transmons.
    j_left, j_right : int
        Level indices entering the dispersive denominators.
    coupling : ResonatorCoupling
        The shared bus resonator.
    left_frequency, right_frequency : float, optional
        Instantaneous qubit frequencies in GHz; default to the bare values.
    """
    f_l = left.bare_frequency if left_frequency is None else left_frequency
    f_r = right.bare_frequency if right_frequency is None else right_frequency
    w_r = coupling.resonator_frequency
    den_l = f_l + left.anharmonicity * j_left - w_r
    den_r = f_r + right.anharmonicity * j_right - w_r
    for den, t, j, f in ((den_l, left, j_left, f_l), (den_r, right, j_right, f_r)):
        if abs(den) <= dispersive_floor:
            raise SingularityError(
                f"transmon {t.index} level {j} at {f} GHz is within "
                f"{dispersive_floor} GHz of resonator {w_r} GHz",
                transmon=t.index,
                level=j,
                resonator_frequency=w_r,
            )
    g2 = coupling.g_for(left.index) * coupling.g_for(right.index)
    return g2 * (den_l + den_r) / (2.0 * den_l * den_r)


class _HamiltonianTemplate:
    """Precomputed sparsity pattern of the chain Hamiltonian on a basis.

    The basis graph (which state pairs exchange an excitation through which
    resonator) is frequency-independent, so it is built once; ``build``
    then only evaluates the dressed energies and couplings for the given
    frequencies and scatters them into a dense matrix.
    """

    def __init__(self, device, basis):
        if basis.n_transmons != device.n_transmons:
            raise ValueError(
                f"basis has {basis.n_transmons} transmons, "
                f"device has {device.n_transmons}"
            )
        levels = device.levels_per_transmon
        occ = basis.occupations()
        if occ.max(initial=0) >= levels:
            raise ValueError("basis contains levels outside the device truncation")
        self.device = device
        self.basis = basis
        self.occupations = occ
        dim = basis.dimension
        n = device.n_transmons

        # Off-diagonal entries: move one excitation from transmon k+1 to k.
        rows, cols, pair_idx, jk, jk1, fac = [], [], [], [], [], []
        for p, state in enumerate(basis.states):
            for k in range(n - 1):
                if state[k] + 1 >= levels or state[k + 1] < 1:
                    continue
                partner = list(state)
                partner[k] += 1
                partner[k + 1] -= 1
                q = basis.index_of(partner)
                rows.append(q)
                cols.append(p)
                pair_idx.append(k)
                jk.append(state[k])
                jk1.append(state[k + 1] - 1)
                fac.append(np.sqrt((state[k] + 1) * state[k + 1]))
        self.rows = np.array(rows, dtype=np.intp)
        self.cols = np.array(cols, dtype=np.intp)
        self.pair_idx = np.array(pair_idx, dtype=np.intp)
        self.jk = np.array(jk, dtype=np.intp)
        self.jk1 = np.array(jk1, dtype=np.intp)
        self.fac = np.array(fac)
        self.dim = dim

        # Per-transmon resonator attachments: (g, resonator frequency) lists.
        self.attachments = [
            [(c.g_for(k), c.resonator_frequency) for c in device.adjacent_couplings(k)]
            for k in range(n)
        ]
        self.anharmonicities = np.array([t.anharmonicity for t in device.transmons])
        self.levels = levels

    def dressed_table(self, frequencies):
        """Dressed energies w[k, j] in GHz for the given qubit frequencies."""
        device = self.device
        n = device.n_transmons
        levels = self.levels
        j = np.arange(levels)
        table = np.empty((n, levels))
        floor = device.dispersive_floor
        for k in range(n):
            f = frequencies[k]
            delta = self.anharmonicities[k]
            w = j * f + 0.5 * delta * (j - 1) * j
            for g, w_r in self.attachments[k]:
                den = f - w_r + (j[1:] - 1) * delta
                bad = np.abs(den) <= floor
                if bad.any():
                    level = int(j[1:][bad][0])
                    raise SingularityError(
                        f"transmon {k} level {level} at {f} GHz is within "
                        f"{floor} GHz of resonator {w_r} GHz",
                        transmon=k,
                        level=level,
                        resonator_frequency=w_r,
                    )
                w[1:] += j[1:] * g * g / den
            table[k] = w
        return table

    def exchange_table(self, frequencies):
        """J[k, j, j'] in GHz for each resonator pair at the given frequencies."""
        device = self.device
        levels = self.levels
        floor = device.dispersive_floor
        j = np.arange(levels - 1)
        tables = []
        for c in device.couplings:
            k = c.left_index
            den_l = frequencies[k] + self.anharmonicities[k] * j - c.resonator_frequency
            den_r = (
                frequencies[k + 1]
                + self.anharmonicities[k + 1] * j
                - c.resonator_frequency
            )
            for den, idx in ((den_l, k), (den_r, k + 1)):
                bad = np.abs(den) <= floor
                if bad.any():
                    level = int(j[bad][0])
                    raise SingularityError(
                        f"transmon {idx} level {level} at "
                        f"{frequencies[idx]} GHz is within {floor} GHz of "
                        f"resonator {c.resonator_frequency} GHz",
                        transmon=idx,
                        level=level,
                        resonator_frequency=c.resonator_frequency,
                    )
            g2 = c.g_left * c.g_right
            tables.append(
                g2 * (den_l[:, None] + den_r[None, :])
                / (2.0 * den_l[:, None] * den_r[None, :])
            )
        return tables

    def build(self, frequencies):
        """Dense Hermitian matrix in angular units (rad/ns)."""
        frequencies = np.asarray(frequencies, dtype=float)
        if frequencies.shape != (self.device.n_transmons,):
            raise ValueError(
                f"expected {self.device.n_transmons} frequencies, "
                f"got shape {frequencies.shape}"
            )
        w = self.dressed_table(frequencies)
        diag = w[np.arange(self.device.n_transmons), self.occupations].sum(axis=1)
        h = np.zeros((self.dim, self.dim), dtype=complex)
        np.fill_diagonal(h, TWO_PI * diag)
        if len(self.rows):
            j_tables = self.exchange_table(frequencies)
            amps = np.empty(len(self.rows))
            for k, table in enumerate(j_tables):
                sel = self.pair_idx == k
                amps[sel] = table[self.jk[sel], self.jk1[sel]]
            amps = TWO_PI * self.fac * amps
            h[self.rows, self.cols] = amps
            h[self.cols, self.rows] = amps
        return h


@lru_cache(maxsize=64)
def _template(device, basis):
    return _HamiltonianTemplate(device, basis)


def build_hamiltonian(device, basis, frequencies):
    """Chain Hamiltonian on a truncated basis, in angular units (rad/ns).

    Diagonal entries sum the dressed level energies over each occupation
    vector; off-diagonal entries connect neighbour pairs that exchange one
    excitation, with amplitude sqrt(j_k+1)*sqrt(j_{k+1}+1)*J.  The result
    is exactly Hermitian and block diagonal in the total excitation number.

    Parameters
    ----------
    device : DeviceChain
    basis : TruncatedBasis
    frequencies : sequence of float
        Instantaneous qubit frequencies in GHz, one per transmon.
    """
    return _template(device, basis).build(frequencies)


def device_from_json(doc):
    """Build a :class:`DeviceChain` from a parsed JSON document.

    Expected keys: ``transmons`` (list of ``{bare_frequency_ghz,
    anharmonicity_ghz, idle_frequency_ghz}``), ``resonators`` (list of
    ``{frequency_ghz, g_left_ghz, g_right_ghz}``), ``levels_per_transmon``,
    ``max_total_excitation``; optional ``dispersive_floor_ghz``.
    """
    transmons = tuple(
        TransmonSpec(
            index=i,
            bare_frequency=t["bare_frequency_ghz"],
            anharmonicity=t["anharmonicity_ghz"],
            idle_frequency=t.get("idle_frequency_ghz"),
        )
        for i, t in enumerate(doc["transmons"])
    )
    couplings = tuple(
        ResonatorCoupling(
            left_index=i,
            right_index=i + 1,
            resonator_frequency=r["frequency_ghz"],
            g_left=r["g_left_ghz"],
            g_right=r["g_right_ghz"],
        )
        for i, r in enumerate(doc["resonators"])
    )
    return DeviceChain(
        transmons,
        couplings,
        levels_per_transmon=doc.get("levels_per_transmon", 4),
        max_total_excitation=doc.get("max_total_excitation", 3),
        dispersive_floor=doc.get("dispersive_floor_ghz", 0.1),
    )


def device_to_json(device):
    """Inverse of :func:`device_from_json`."""
    return {
        "transmons": [
            {
                "bare_frequency_ghz": t.bare_frequency,
                "anharmonicity_ghz": t.anharmonicity,
                "idle_frequency_ghz": t.idle_frequency,
            }
            for t in device.transmons
        ],
        "resonators": [
            {
                "frequency_ghz": c.resonator_frequency,
                "g_left_ghz": c.g_left,
                "g_right_ghz": c.g_right,
            }
            for c in device.couplings
        ],
        "levels_per_transmon": device.levels_per_transmon,
        "max_total_excitation": device.max_total_excitation,
        "dispersive_floor_ghz": device.dispersive_floor,
    }


def load_device(path):
    """Load a device description from a JSON file."""
    with open(path) as fh:
        return device_from_json(json.load(fh))
