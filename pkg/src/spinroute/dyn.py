"""Exact dynamics in the few-excitation sectors of XX networks.

The coupling Hamiltonian H = 1/2 sum J_{nm} (XnXm + YnYm) conserves the
total excitation number, so each k-excitation sector is simulated exactly
with a dense hopping matrix: <S'|H|S> = J_{nm} whenever configuration S'
is S with one excitation moved across edge {n, m}.  Evolution goes through
a cached eigendecomposition; local Z pulses are diagonal phase masks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .net import CouplingGraph, SiteId, _unit_phase


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Lexicographically ordered k-subsets of sites (site order of graph)."""

    graph: CouplingGraph
    k: int

    def __post_init__(self):
        if not 0 <= self.k <= self.graph.n_sites:
            raise ValueError("excitation count k out of range")

    @cached_property
    def configurations(self) -> tuple:
        return tuple(itertools.combinations(range(self.graph.n_sites), self.k))

    @cached_property
    def config_index(self) -> dict:
        return {c: i for i, c in enumerate(self.configurations)}

    @property
    def dim(self) -> int:
        return math.comb(self.graph.n_sites, self.k)

    def basis_state(self, sites) -> "ExcitationState":
        """Computational state with excitations exactly on ``sites``."""
        occ = tuple(sorted(self.graph.index[s] for s in sites))
        if len(occ) != self.k:
            raise ValueError("need exactly k distinct sites")
        amps = np.zeros(self.dim, dtype=complex)
        amps[self.config_index[occ]] = 1.0
        return ExcitationState(basis=self, amplitudes=amps)

    def from_site_vector(self, vec: np.ndarray) -> "ExcitationState":
        """Single-excitation state from an amplitude vector over sites."""
        if self.k != 1:
            raise ValueError("site vectors only define k=1 states")
        return ExcitationState(basis=self, amplitudes=np.asarray(vec, dtype=complex).copy())


@dataclass(frozen=True, eq=False)
class ExcitationState:
    basis: SectorBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError("amplitude vector has wrong dimension")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_json(self) -> dict:
        return {
            "k": self.basis.k,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }


def state_from_json(doc: dict, graph: CouplingGraph) -> ExcitationState:
    basis = SectorBasis(graph=graph, k=int(doc["k"]))
    amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    return ExcitationState(basis=basis, amplitudes=amps)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    basis: SectorBasis
    matrix: np.ndarray

    def __post_init__(self):
        if np.abs(self.matrix - self.matrix.conj().T).max() > 1e-14:
            raise ValueError("matrix is not Hermitian")


def sector_hamiltonian(graph: CouplingGraph, k: int) -> HermitianOperator:
    """Hopping matrix of the k-excitation sector; k=0 gives the 1x1 zero."""
    basis = SectorBasis(graph=graph, k=k)
    dim = basis.dim
    H = np.zeros((dim, dim))
    if k > 0:
        for u, v, J in graph.edges:
            iu, iv = graph.index[u], graph.index[v]
            for idx, config in enumerate(basis.configurations):
                occ = set(config)
                for a, b in ((iu, iv), (iv, iu)):
                    if a in occ and b not in occ:
                        moved = tuple(sorted(occ - {a} | {b}))
                        H[basis.config_index[moved], idx] += J
    return HermitianOperator(basis=basis, matrix=H)


@dataclass(frozen=True, eq=False)
class SpectralCache:
    """Eigendecomposition of a sector Hamiltonian, shareable across threads."""

    basis: SectorBasis
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def build(cls, op: HermitianOperator) -> "SpectralCache":
        evals, evecs = np.linalg.eigh(op.matrix)
        cache = cls(basis=op.basis, eigenvalues=evals, eigenvectors=evecs)
        recon = (evecs * evals) @ evecs.conj().T
        if np.abs(recon - op.matrix).max() > 1e-10:
            raise ValueError("eigendecomposition failed to reconstruct H")
        return cache

    def propagator(self, t: float) -> np.ndarray:
        V = self.eigenvectors
        return (V * np.exp(-1j * self.eigenvalues * t)) @ V.conj().T


def spectral_cache(graph: CouplingGraph, k: int = 1) -> SpectralCache:
    return SpectralCache.build(sector_hamiltonian(graph, k))


def evolve(state: ExcitationState, t: float, cache: SpectralCache) -> ExcitationState:
    if cache.basis.dim != state.basis.dim:
        raise ValueError("state and cache live in different sectors")
    V = cache.eigenvectors
    amps = V @ (np.exp(-1j * cache.eigenvalues * t) * (V.conj().T @ state.amplitudes))
    return ExcitationState(basis=state.basis, amplitudes=amps)


def apply_phase_set(state: ExcitationState, phases: dict) -> ExcitationState:
    """Z^(theta) pulses: each occupied pulsed site contributes e^{i theta}."""
    basis = state.basis
    graph = basis.graph
    site_phase = np.ones(graph.n_sites, dtype=complex)
    for site, theta in phases.items():
        if site not in graph.index:
            raise ValueError("unknown site %s" % (site,))
        site_phase[graph.index[site]] *= _unit_phase(theta)
    if basis.k == 0:
        return state
    config = np.array(basis.configurations)
    mask = site_phase[config].prod(axis=1)
    return ExcitationState(basis=basis, amplitudes=state.amplitudes * mask)


# ---------------------------------------------------------------------------
# Pulse schedules
# ---------------------------------------------------------------------------

def reduce_angle(theta: float) -> float:
    """Reduce to the canonical interval (-pi, pi]."""
    r = math.fmod(theta, 2 * math.pi)
    if r > math.pi:
        r -= 2 * math.pi
    elif r <= -math.pi:
        r += 2 * math.pi
    return r


@dataclass(frozen=True)
class Evolve:
    duration: float

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ValueError("evolution duration must be finite and >= 0")


@dataclass(frozen=True)
class PhaseSet:
    phases: tuple  # sorted ((SiteId, angle), ...), angles in (-pi, pi]

    @classmethod
    def on(cls, mapping: dict) -> "PhaseSet":
        items = []
        for site, theta in mapping.items():
            theta = reduce_angle(theta)
            if theta != 0.0:
                items.append((site, theta))
        return cls(phases=tuple(sorted(items, key=lambda it: it[0].key)))

    def as_dict(self) -> dict:
        return dict(self.phases)


@dataclass(frozen=True)
class PulseSchedule:
    """Alternation of free evolutions and instantaneous local Z pulses."""

    steps: tuple = ()

    @property
    def total_duration(self) -> float:
        return math.fsum(s.duration for s in self.steps if isinstance(s, Evolve))

    @property
    def evolve_durations(self) -> tuple:
        return tuple(s.duration for s in self.steps if isinstance(s, Evolve))

    @property
    def pulse_count(self) -> int:
        return sum(1 for s in self.steps if isinstance(s, PhaseSet))

    def then(self, other: "PulseSchedule") -> "PulseSchedule":
        return PulseSchedule(steps=self.steps + other.steps)

    def reversed_negated(self) -> "PulseSchedule":
        """Steps in reverse order with negated pulse angles.

        Not the inverse unitary (evolutions still run forward), but on the
        real-amplitude states the routing protocols move between, it undoes
        the original schedule up to a global phase.
        """
        out = []
        for step in reversed(self.steps):
            if isinstance(step, Evolve):
                out.append(step)
            else:
                out.append(PhaseSet.on({s: -t for s, t in step.phases}))
        return PulseSchedule(steps=tuple(out))

    def to_json(self) -> dict:
        steps = []
        for step in self.steps:
            if isinstance(step, Evolve):
                steps.append({"evolve": step.duration})
            else:
                steps.append({"phases": {s.label: t for s, t in step.phases}})
        return {"steps": steps}


def schedule_from_json(doc: dict, graph: CouplingGraph) -> PulseSchedule:
    steps = []
    for step in doc["steps"]:
        if "evolve" in step:
            steps.append(Evolve(duration=float(step["evolve"])))
        else:
            steps.append(
                PhaseSet.on(
                    {graph.label_index[lbl]: float(t) for lbl, t in step["phases"].items()}
                )
            )
    return PulseSchedule(steps=tuple(steps))


def run_schedule(
    state: ExcitationState, schedule: PulseSchedule, cache: SpectralCache
) -> ExcitationState:
    """Fold the schedule's steps over the state; pulses are instantaneous."""
    for step in schedule.steps:
        if isinstance(step, Evolve):
            state = evolve(state, step.duration, cache)
        else:
            state = apply_phase_set(state, step.as_dict())
    return state


def fidelity_up_to_phase(a: ExcitationState, b: ExcitationState) -> float:
    if a.basis.dim != b.basis.dim:
        raise ValueError("states live in different sectors")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


# ---------------------------------------------------------------------------
# Transfer-time discovery
# ---------------------------------------------------------------------------

GRID_POINTS = 4096
T_MAX_DEFAULT = 8 * math.pi


def transfer_time(
    graph: CouplingGraph,
    src: SiteId,
    dst: SiteId,
    t_max: float = T_MAX_DEFAULT,
    grid: int = GRID_POINTS,
):
    """Locate the best |<dst|e^{-iHt}|src>| peak on [0, t_max].

    Scans a uniform grid, refines the best point by golden-section search
    to 1e-12 in t, and returns (t*, fidelity) or None when the peak falls
    short of 1 - 1e-6.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    cache = spectral_cache(graph, 1)
    V = cache.eigenvectors
    w = V[graph.index[dst], :] * V[graph.index[src], :].conj()

    def amp(t):
        return abs(np.dot(w, np.exp(-1j * cache.eigenvalues * t)))

    ts = np.linspace(0.0, t_max, grid)
    amps = np.abs(np.exp(-1j * np.outer(ts, cache.eigenvalues)) @ w)
    best = int(np.argmax(amps))
    lo = ts[max(best - 1, 0)]
    hi = ts[min(best + 1, grid - 1)]
    t_star = _golden_max(amp, lo, hi, tol=1e-12)
    f = amp(t_star)
    if f < 1 - 1e-6:
        return None
    return t_star, f


def _golden_max(f, lo, hi, tol):
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2
