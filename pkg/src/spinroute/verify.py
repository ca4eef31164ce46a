"""Structural and statistical verification.

Identity checks (direct-sum residuals, the transfer-time reflection) are
exact linear algebra; robustness of the block lattice to faulty blocks is
quantified by site-percolation Monte Carlo with a union-find spanning
test, using counter-derived per-trial random substreams so results are
reproducible regardless of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import dyn, net


# ---------------------------------------------------------------------------
# Direct-sum and reflection identities
# ---------------------------------------------------------------------------

def direct_sum_residual(graph: net.CouplingGraph, basis: net.BasisMap) -> float:
    """Largest |<i|H|j>| between basis columns tagged to different subsystems."""
    if basis.graph is not graph and basis.graph.sites != graph.sites:
        raise ValueError("basis does not cover this graph")
    H = graph.adjacency()
    Heff = basis.matrix.conj().T @ H @ basis.matrix
    n = Heff.shape[0]
    subs = [t[0] for t in basis.tags]
    residual = 0.0
    for i in range(n):
        for j in range(n):
            if subs[i] != subs[j]:
                residual = max(residual, abs(Heff[i, j]))
    return float(residual)


@dataclass(frozen=True)
class ReflectionReport:
    M: int
    d: int
    t0: float
    global_phase: complex
    residual: float

    @property
    def ok(self) -> bool:
        return self.residual < 1e-9


def check_star_reflection(block: net.BlockTemplate, calibration) -> ReflectionReport:
    """Assert e^{-iH t0} equals, up to one global phase, the unitary acting
    as W_0^n <-> W_0^{M+1-n} and -1 on every branch-Fourier state k != 0."""
    cache = dyn.spectral_cache(block.graph, 1)
    U = cache.propagator(calibration.t0)
    S = net.reflection_with_sign(block)
    tr = np.trace(S.conj().T @ U)
    phase = tr / abs(tr)
    residual = float(np.abs(U - phase * S).max())
    return ReflectionReport(
        M=block.M, d=block.d, t0=calibration.t0, global_phase=complex(phase), residual=residual
    )


# ---------------------------------------------------------------------------
# Site percolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FaultMap:
    faulty: frozenset

    @classmethod
    def sample(cls, spec: net.LatticeSpec, fault_probability: float, seed: int) -> "FaultMap":
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0xFA)))
        blocks = spec.blocks()
        draws = rng.random(len(blocks))
        return cls(faulty=frozenset(b for b, x in zip(blocks, draws) if x < fault_probability))


@dataclass(frozen=True)
class PercolationResult:
    kind: str
    L: int
    p: float
    trials: int
    spanning: float
    stderr: float
    seed: int

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "L": self.L,
            "p": self.p,
            "trials": self.trials,
            "spanning": self.spanning,
            "stderr": self.stderr,
            "seed": self.seed,
        }


_NEIGHBORS_2D = {
    "square": ((1, 0), (-1, 0), (0, 1), (0, -1)),
    "triangular": ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)),
}


@njit(cache=True)
def _uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


@njit(cache=True)
def _uf_union(parent, rank, a, b):
    ra, rb = _uf_find(parent, a), _uf_find(parent, b)
    if ra == rb:
        return
    if rank[ra] < rank[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    if rank[ra] == rank[rb]:
        rank[ra] += 1


@njit(cache=True)
def _spans_2d(grid, offsets):
    """Left-to-right crossing of occupied sites; virtual roots n and n+1."""
    L = grid.shape[0]
    n = L * L
    parent = np.arange(n + 2)
    rank = np.zeros(n + 2, dtype=np.int32)
    left, right = n, n + 1
    for i in range(L):
        for j in range(L):
            if not grid[i, j]:
                continue
            idx = i * L + j
            if j == 0:
                _uf_union(parent, rank, idx, left)
            if j == L - 1:
                _uf_union(parent, rank, idx, right)
            for k in range(offsets.shape[0]):
                ni = i + offsets[k, 0]
                nj = j + offsets[k, 1]
                if 0 <= ni < L and 0 <= nj < L and grid[ni, nj]:
                    _uf_union(parent, rank, idx, ni * L + nj)
    return _uf_find(parent, left) == _uf_find(parent, right)


@njit(cache=True)
def _spans_3d(grid):
    L = grid.shape[0]
    n = L * L * L
    parent = np.arange(n + 2)
    rank = np.zeros(n + 2, dtype=np.int32)
    left, right = n, n + 1
    for i in range(L):
        for j in range(L):
            for k in range(L):
                if not grid[i, j, k]:
                    continue
                idx = (i * L + j) * L + k
                if k == 0:
                    _uf_union(parent, rank, idx, left)
                if k == L - 1:
                    _uf_union(parent, rank, idx, right)
                for axis in range(3):
                    for s in (-1, 1):
                        ni, nj, nk = i, j, k
                        if axis == 0:
                            ni += s
                        elif axis == 1:
                            nj += s
                        else:
                            nk += s
                        if 0 <= ni < L and 0 <= nj < L and 0 <= nk < L and grid[ni, nj, nk]:
                            _uf_union(parent, rank, idx, (ni * L + nj) * L + nk)
    return _uf_find(parent, left) == _uf_find(parent, right)


def percolation_estimate(
    kind: str, L: int, p: float, trials: int, seed: int = 0
) -> PercolationResult:
    """Monte Carlo estimate of the side-to-side spanning frequency.

    Sites are occupied independently with probability p; trial r draws its
    randomness from the substream (seed, r), so the estimate is identical
    however trials are ordered or distributed.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("occupation probability must lie in [0, 1]")
    if L < 2 or trials < 1:
        raise ValueError("need L >= 2 and trials >= 1")
    if kind not in ("square", "triangular", "cubic"):
        raise ValueError("unknown lattice kind %r" % kind)
    hits = 0
    offsets = (
        np.array(_NEIGHBORS_2D[kind], dtype=np.int64) if kind != "cubic" else None
    )
    for r in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence((seed, r)))
        if kind == "cubic":
            grid = rng.random((L, L, L)) < p
            hits += bool(_spans_3d(grid))
        else:
            grid = rng.random((L, L)) < p
            hits += bool(_spans_2d(grid, offsets))
    freq = hits / trials
    stderr = math.sqrt(freq * (1 - freq) / trials)
    return PercolationResult(
        kind=kind, L=L, p=p, trials=trials, spanning=freq, stderr=stderr, seed=seed
    )


# ---------------------------------------------------------------------------
# Block-level reachability
# ---------------------------------------------------------------------------

def reachability(tiled, faults, src_block, dst_block) -> bool:
    """True when a path of non-faulty blocks joins the two endpoints."""
    faults = frozenset(getattr(faults, "faulty", faults))
    if src_block in faults or dst_block in faults:
        return False
    spec = tiled.spec if isinstance(tiled, net.TiledNetwork) else tiled
    seen = {src_block}
    stack = [src_block]
    while stack:
        b = stack.pop()
        if b == dst_block:
            return True
        for nb in spec.neighbors(b):
            if nb not in faults and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return False
