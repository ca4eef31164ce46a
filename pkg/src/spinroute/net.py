"""Coupling graphs for spin networks with exact routing protocols.

Builders for the graph families used throughout the package:

* the quasi-1D diamond chain whose single-excitation Hamiltonian block
  diagonalises into uniformly coupled 2- and 3-site chains,
* mirror-symmetric perfect-transfer chains and their star-shaped splits
  (2d branches around a rescaled hub),
* lattices of star blocks joined through two-site "V" links whose
  symmetric/antisymmetric combinations act as the ports of the two
  adjacent blocks.

All builders are pure functions; the emitted structures are immutable and
safe to share between threads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

SQRT2 = math.sqrt(2.0)

# Lattice kinds and the branch count d each one requires (2d branches per
# block).  Chain and square patches are open and keep physical boundary
# ports; triangular and cubic wrap periodically so that every branch is
# linked and the d=3 family has uniform coupling modulus.
LATTICE_BRANCHES = {"chain": 1, "square": 2, "triangular": 3, "cubic": 3}
PERIODIC_KINDS = frozenset({"triangular", "cubic"})

_LATTICE_DIRECTIONS = {
    "chain": ((1,),),
    "square": ((1, 0), (0, 1)),
    "triangular": ((1, 0), (0, 1), (1, -1)),
    "cubic": ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
}


@dataclass(frozen=True)
class SiteId:
    """Structured site identifier with a total deterministic ordering.

    ``key`` drives ordering (and therefore basis ordering everywhere);
    ``label`` is the canonical rendering used in JSON files.
    """

    label: str
    key: tuple = field(repr=False)

    def __lt__(self, other: "SiteId"):
        return self.key < other.key

    def __str__(self):
        return self.label


def site_index(n: int) -> SiteId:
    """Raw 1-based index site, used by chain and prototype builders."""
    return SiteId(label=str(n), key=(0, n))


def _block_prefix(block: tuple) -> str:
    return "b(%s)." % ",".join(str(c) for c in block) if block else ""


def site_branch(block: tuple, branch: int, depth: int) -> SiteId:
    """Branch site of a star block; ``branch`` in 1..2d, depth 1 is the rim."""
    return SiteId(
        label="%sbr%d.d%d" % (_block_prefix(block), branch, depth),
        key=(1, block, 1, branch, depth),
    )


def site_center(block: tuple) -> SiteId:
    return SiteId(label="%sc" % _block_prefix(block), key=(1, block, 0, 0, 0))


def site_pair(block: tuple, branch: int, member: str) -> SiteId:
    """Member ('p' or 'q') of the shared V pair on the link leaving
    ``block`` through its side-1 ``branch``."""
    if member not in ("p", "q"):
        raise ValueError("pair member must be 'p' or 'q'")
    return SiteId(
        label="%sl%d.%s" % (_block_prefix(block), branch, member),
        key=(2, block, branch, 0 if member == "p" else 1),
    )


@dataclass(frozen=True, eq=False)
class CouplingGraph:
    """Weighted undirected graph of spin sites.

    In the single-excitation sector the Hamiltonian matrix is exactly the
    signed adjacency matrix built from the couplings J.
    """

    sites: tuple
    edges: tuple  # of (SiteId, SiteId, float), canonically ordered

    def __post_init__(self):
        index = {s: i for i, s in enumerate(self.sites)}
        if len(index) != len(self.sites):
            raise ValueError("duplicate site ids")
        seen = set()
        for u, v, J in self.edges:
            if u == v:
                raise ValueError("self-loop on %s" % u)
            if J == 0.0:
                raise ValueError("zero coupling on (%s, %s)" % (u, v))
            pair = (u, v)
            if pair in seen or (v, u) in seen:
                raise ValueError("duplicate edge (%s, %s)" % (u, v))
            seen.add(pair)
        if not self._connected(index):
            raise ValueError("graph is not connected")

    def _connected(self, index) -> bool:
        if not self.sites:
            return False
        adj = [[] for _ in self.sites]
        for u, v, _ in self.edges:
            adj[index[u]].append(index[v])
            adj[index[v]].append(index[u])
        seen = {0}
        stack = [0]
        while stack:
            for j in adj[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == len(self.sites)

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.sites)}

    @cached_property
    def label_index(self) -> dict:
        return {s.label: s for s in self.sites}

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def adjacency(self) -> np.ndarray:
        """Dense signed adjacency matrix (the single-excitation Hamiltonian)."""
        n = len(self.sites)
        A = np.zeros((n, n))
        for u, v, J in self.edges:
            i, j = self.index[u], self.index[v]
            A[i, j] = J
            A[j, i] = J
        return A

    def coupling_moduli(self) -> np.ndarray:
        return np.array(sorted(abs(J) for _, _, J in self.edges))


def _make_graph(sites, edges) -> CouplingGraph:
    sites = tuple(sorted(sites, key=lambda s: s.key))
    canon = []
    for u, v, J in edges:
        if v.key < u.key:
            u, v = v, u
        canon.append((u, v, float(J)))
    canon.sort(key=lambda e: (e[0].key, e[1].key))
    return CouplingGraph(sites=sites, edges=tuple(canon))


# ---------------------------------------------------------------------------
# 1D diamond-chain prototype
# ---------------------------------------------------------------------------

def build_prototype_1d(N: int) -> CouplingGraph:
    """Diamond chain of 3N+1 sites, couplings +1 except J(3k,3k+1) = -1.

    Diamond k (1-based) joins hub 3k-2 through the parallel pair
    (3k-1, 3k) to the next hub 3k+1; the single negative edge per diamond
    makes the pair's symmetric/antisymmetric combinations belong to the
    left/right effective subsystem respectively.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    sites = [site_index(n) for n in range(1, 3 * N + 2)]
    edges = []
    for k in range(1, N + 1):
        hub, top, bot, nxt = 3 * k - 2, 3 * k - 1, 3 * k, 3 * k + 1
        edges += [
            (site_index(hub), site_index(top), 1.0),
            (site_index(hub), site_index(bot), 1.0),
            (site_index(top), site_index(nxt), 1.0),
            (site_index(bot), site_index(nxt), -1.0),
        ]
    return _make_graph(sites, edges)


def prototype_size(graph: CouplingGraph) -> int:
    """Return N for a graph produced by build_prototype_1d, else raise."""
    n = graph.n_sites
    if n < 4 or (n - 1) % 3 != 0:
        raise ValueError("not a diamond-chain prototype")
    N = (n - 1) // 3
    if graph.edges != build_prototype_1d(N).edges:
        raise ValueError("not a diamond-chain prototype")
    return N


# ---------------------------------------------------------------------------
# Perfect-transfer chains and star blocks
# ---------------------------------------------------------------------------

def pst_chain_couplings(M: int) -> tuple:
    """Mirror-symmetric couplings K_n = sqrt(n(M-n)/2) for an M-site chain.

    The normalisation gives eigenvalues sqrt(2)*{-(M-1)/2 .. (M-1)/2} and
    end-to-end transfer at t0 = pi/sqrt(2) for every odd M; M=5 yields
    (sqrt2, sqrt3, sqrt3, sqrt2).
    """
    if M < 5 or M % 2 == 0:
        raise ValueError("M must be odd and >= 5")
    return tuple(math.sqrt(n * (M - n) / 2) for n in range(1, M))


def build_pst_chain(M: int) -> CouplingGraph:
    """Open chain of M sites with the perfect-transfer couplings."""
    K = pst_chain_couplings(M)
    sites = [site_index(n) for n in range(1, M + 1)]
    edges = [(site_index(n), site_index(n + 1), K[n - 1]) for n in range(1, M)]
    return _make_graph(sites, edges)


@dataclass(frozen=True, eq=False)
class BlockTemplate:
    """Star split of an M-site perfect-transfer chain into 2d branches.

    Branches 1..d form side 1 (ports ``brj.d1``), branches d+1..2d side M.
    Branch couplings follow K_1..K_{(M-3)/2} rim-inward; all 2d hub
    couplings equal K_{(M-1)/2}/sqrt(d), which preserves the chain's
    transfer time within every branch-Fourier sector.
    """

    M: int
    d: int
    graph: CouplingGraph
    side1_ports: tuple
    sideM_ports: tuple

    @property
    def half(self) -> int:
        return (self.M - 1) // 2

    @property
    def center(self) -> SiteId:
        return site_center(())

    def branch_site(self, branch: int, depth: int) -> SiteId:
        return site_branch((), branch, depth)

    def position_sites(self, n: int) -> tuple:
        """Sites at chain position n (1..M): d rim-distance sites, or the hub."""
        c = (self.M + 1) // 2
        if n == c:
            return (self.center,)
        if n < c:
            return tuple(self.branch_site(j, n) for j in range(1, self.d + 1))
        depth = self.M + 1 - n
        return tuple(self.branch_site(self.d + j, depth) for j in range(1, self.d + 1))

    def port(self, side: int, j: int) -> SiteId:
        """Port site: side 0 is the side-1 rim, side 1 the side-M rim."""
        branch = j if side == 0 else self.d + j
        return self.branch_site(branch, 1)


def build_star_block(M: int, d: int) -> BlockTemplate:
    """Star block with d(M-1)+1 sites; (M=5, d=1) is the plain 5-chain."""
    if M < 5 or M % 2 == 0:
        raise ValueError("M must be odd and >= 5")
    if d < 1:
        raise ValueError("d must be >= 1")
    K = pst_chain_couplings(M)
    half = (M - 1) // 2
    center = site_center(())
    sites = [center]
    edges = []
    for br in range(1, 2 * d + 1):
        for dep in range(1, half + 1):
            sites.append(site_branch((), br, dep))
        for dep in range(1, half):
            edges.append((site_branch((), br, dep), site_branch((), br, dep + 1), K[dep - 1]))
        edges.append((site_branch((), br, half), center, K[half - 1] / math.sqrt(d)))
    graph = _make_graph(sites, edges)
    return BlockTemplate(
        M=M,
        d=d,
        graph=graph,
        side1_ports=tuple(site_branch((), j, 1) for j in range(1, d + 1)),
        sideM_ports=tuple(site_branch((), d + j, 1) for j in range(1, d + 1)),
    )


def w_state(block: BlockTemplate, n: int, k: int) -> np.ndarray:
    """Branch-Fourier state at chain position n: (1/sqrt d) sum_j e^{2pi i jk/d} |nj>.

    Returns the amplitude vector over ``block.graph`` site order.  The hub
    position (M+1)/2 only exists for k = 0.
    """
    if not 1 <= n <= block.M:
        raise ValueError("position n out of range")
    d = block.d
    if n == (block.M + 1) // 2:
        if k != 0:
            raise ValueError("hub position has no k != 0 state")
        v = np.zeros(block.graph.n_sites, dtype=complex)
        v[block.graph.index[block.center]] = 1.0
        return v
    if not 0 <= k < d:
        raise ValueError("k out of range")
    v = np.zeros(block.graph.n_sites, dtype=complex)
    for j, s in enumerate(block.position_sites(n), start=1):
        v[block.graph.index[s]] = _unit_phase(2.0 * math.pi * j * k / d) / math.sqrt(d)
    return v


def _unit_phase(theta: float) -> complex:
    """e^{i theta}, exact for quarter-turn multiples so sign pulses stay crisp."""
    q = theta / (math.pi / 2)
    r = round(q)
    if q == r:
        return (1.0, 1j, -1.0, -1j)[r % 4]
    return complex(math.cos(theta), math.sin(theta))


def reflection_with_sign(block: "BlockTemplate") -> np.ndarray:
    """The unitary a star block realises per transfer time, up to one
    global phase: W_0^n <-> W_0^{M+1-n} and -1 on every k != 0 state."""
    n = block.graph.n_sites
    S = np.zeros((n, n), dtype=complex)
    M, d = block.M, block.d
    for pos in range(1, M + 1):
        S += np.outer(w_state(block, M + 1 - pos, 0), w_state(block, pos, 0).conj())
    for pos in [p for p in range(1, M + 1) if p != (M + 1) // 2]:
        for k in range(1, d):
            w = w_state(block, pos, k)
            S -= np.outer(w, w.conj())
    return S


# ---------------------------------------------------------------------------
# Lattices of star blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSpec:
    """Block lattice geometry: kind fixes both d and the link directions."""

    kind: str
    extent: tuple

    def __post_init__(self):
        if self.kind not in LATTICE_BRANCHES:
            raise ValueError("unknown lattice kind %r" % (self.kind,))
        dirs = _LATTICE_DIRECTIONS[self.kind]
        ndim = len(dirs[0])
        if len(self.extent) != ndim:
            raise ValueError("%s lattice needs %d extent entries" % (self.kind, ndim))
        low = 2 if self.periodic else 1
        if any(e < low for e in self.extent):
            raise ValueError("extent must be >= %d per dimension" % low)

    @property
    def d(self) -> int:
        return LATTICE_BRANCHES[self.kind]

    @property
    def periodic(self) -> bool:
        return self.kind in PERIODIC_KINDS

    @property
    def directions(self) -> tuple:
        return _LATTICE_DIRECTIONS[self.kind]

    def blocks(self) -> tuple:
        return tuple(itertools.product(*(range(e) for e in self.extent)))

    def neighbor(self, block: tuple, direction: tuple):
        """Adjacent block coordinate, or None off an open boundary."""
        raw = tuple(b + s for b, s in zip(block, direction))
        if self.periodic:
            return tuple(r % e for r, e in zip(raw, self.extent))
        if all(0 <= r < e for r, e in zip(raw, self.extent)):
            return raw
        return None

    def neighbors(self, block: tuple) -> tuple:
        out = []
        for delta in self.directions:
            for sign in (1, -1):
                nb = self.neighbor(block, tuple(sign * x for x in delta))
                if nb is not None:
                    out.append(nb)
        return tuple(out)


@dataclass(frozen=True)
class Link:
    """Inter-block link: side-1 branch j of ``src`` meets side-M branch d+j
    of ``dst`` through the shared pair (p, q).

    Both pair sites couple +K1/sqrt2 to the penultimate branch sites except
    q's edge into the lexicographically larger block, which is negative.
    The larger block therefore owns the antisymmetric port combination.
    """

    src: tuple
    branch: int
    dst: tuple
    p: SiteId
    q: SiteId

    @property
    def negative_side(self) -> tuple:
        return max(self.src, self.dst)

    @property
    def designated_member(self) -> SiteId:
        return self.q


@dataclass(frozen=True)
class PortRef:
    """Effective port of a block branch: a plain boundary site, or the
    (|p> + sign|q>)/sqrt2 combination of a shared pair."""

    kind: str  # "site" | "pair"
    sites: tuple
    sign: int = 1

    def phase_targets(self) -> tuple:
        """Sites an effective port-phase pulse must address (all members)."""
        return self.sites

    def amplitudes(self) -> tuple:
        if self.kind == "site":
            return ((self.sites[0], 1.0),)
        return ((self.sites[0], 1 / SQRT2), (self.sites[1], self.sign / SQRT2))


@dataclass(frozen=True, eq=False)
class TiledNetwork:
    """Lattice of star blocks joined by V pairs, plus port bookkeeping."""

    spec: LatticeSpec
    template: BlockTemplate
    graph: CouplingGraph
    links: tuple
    port_map: dict  # (block, branch) -> PortRef

    def block_site(self, block: tuple, branch: int, depth: int) -> SiteId:
        return site_branch(block, branch, depth)

    def block_center(self, block: tuple) -> SiteId:
        return site_center(block)

    def boundary_ports(self) -> tuple:
        """(block, branch, SiteId) for every physical (unlinked) port."""
        out = []
        for (block, branch), ref in sorted(self.port_map.items()):
            if ref.kind == "site":
                out.append((block, branch, ref.sites[0]))
        return tuple(out)

    def link_between(self, a: tuple, b: tuple):
        for link in self.links:
            if {link.src, link.dst} == {a, b}:
                return link
        return None

    def port_vector(self, block: tuple, branch: int) -> np.ndarray:
        """Effective port state as an amplitude vector over graph site order."""
        v = np.zeros(self.graph.n_sites, dtype=complex)
        for s, a in self.port_map[(block, branch)].amplitudes():
            v[self.graph.index[s]] = a
        return v


def tile_network(spec: LatticeSpec, template: BlockTemplate) -> TiledNetwork:
    """Tile ``template`` over ``spec``, replacing every pair of coincident
    extremal sites with a shared V pair of coupling modulus K1/sqrt2."""
    if template.d != spec.d:
        raise ValueError(
            "%s lattice needs d=%d branches per side, template has d=%d"
            % (spec.kind, spec.d, template.d)
        )
    M, d = template.M, template.d
    K1 = pst_chain_couplings(M)[0]
    half = template.half
    Kpair = K1 / SQRT2

    links = []
    linked = {}  # (block, branch) -> (link, "src"|"dst")
    for block in spec.blocks():
        for j, delta in enumerate(spec.directions, start=1):
            nbr = spec.neighbor(block, delta)
            if nbr is None:
                continue
            link = Link(
                src=block,
                branch=j,
                dst=nbr,
                p=site_pair(block, j, "p"),
                q=site_pair(block, j, "q"),
            )
            links.append(link)
            linked[(block, j)] = (link, "src")
            linked[(nbr, d + j)] = (link, "dst")

    K = pst_chain_couplings(M)
    sites = []
    edges = []
    port_map = {}
    for block in spec.blocks():
        center = site_center(block)
        sites.append(center)
        for br in range(1, 2 * d + 1):
            start_depth = 2 if (block, br) in linked else 1
            for dep in range(start_depth, half + 1):
                sites.append(site_branch(block, br, dep))
            for dep in range(start_depth, half):
                edges.append(
                    (site_branch(block, br, dep), site_branch(block, br, dep + 1), K[dep - 1])
                )
            edges.append((site_branch(block, br, half), center, K[half - 1] / math.sqrt(d)))
            if (block, br) not in linked:
                port_map[(block, br)] = PortRef(kind="site", sites=(site_branch(block, br, 1),))

    for link in links:
        sites += [link.p, link.q]
        neg = link.negative_side
        for block, branch in ((link.src, link.branch), (link.dst, d + link.branch)):
            penult = site_branch(block, branch, 2) if half >= 2 else site_center(block)
            edges.append((link.p, penult, Kpair))
            edges.append((link.q, penult, -Kpair if block == neg else Kpair))
            sign = -1 if block == neg else 1
            port_map[(block, branch)] = PortRef(kind="pair", sites=(link.p, link.q), sign=sign)

    graph = _make_graph(sites, edges)
    return TiledNetwork(
        spec=spec, template=template, graph=graph, links=tuple(links), port_map=port_map
    )


# ---------------------------------------------------------------------------
# Structural bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BasisMap:
    """Orthonormal single-excitation basis, each column tagged with the
    effective subsystem it belongs to and its position inside it."""

    graph: CouplingGraph
    matrix: np.ndarray  # columns are the basis vectors, site order of graph
    tags: tuple  # (subsystem_id, position) per column

    def __post_init__(self):
        n = self.graph.n_sites
        if self.matrix.shape != (n, n):
            raise ValueError("basis must be square over the single-excitation sector")
        gram = self.matrix.conj().T @ self.matrix
        if np.abs(gram - np.eye(n)).max() > 1e-12:
            raise ValueError("basis columns are not orthonormal")

    def subsystem_of(self, column: int):
        return self.tags[column][0]


def lambda_basis_1d(graph: CouplingGraph) -> BasisMap:
    """Pair-combination basis of the diamond chain.

    lambda_{3n+1} = |3n+1>, lambda_{3n+2} = (|3n+2>+|3n+3>)/sqrt2,
    lambda_{3n+3} = (|3n+2>-|3n+3>)/sqrt2.  Subsystem 0 is {l1, l2},
    subsystem n the 3-chain {l_{3n}, l_{3n+1}, l_{3n+2}}, subsystem N the
    final {l_{3N}, l_{3N+1}}; every effective coupling is sqrt2.
    """
    N = prototype_size(graph)
    n = graph.n_sites
    B = np.zeros((n, n))
    tags = []
    for col in range(n):
        m = col + 1  # 1-based lambda index, equal to the column position
        if m % 3 == 1:
            B[graph.index[site_index(m)], col] = 1.0
        elif m % 3 == 2:
            B[graph.index[site_index(m)], col] = 1 / SQRT2
            B[graph.index[site_index(m + 1)], col] = 1 / SQRT2
        else:
            B[graph.index[site_index(m - 1)], col] = 1 / SQRT2
            B[graph.index[site_index(m)], col] = -1 / SQRT2
        tags.append((lambda_subsystem(N, m), m))
    return BasisMap(graph=graph, matrix=B, tags=tuple(tags))


def lambda_subsystem(N: int, m: int) -> int:
    """Effective subsystem index (0..N) holding lambda_m.

    Subsystem 0 is the pair {l1, l2}, subsystem n (1 <= n < N) the 3-chain
    {l_3n, l_{3n+1}, l_{3n+2}}, subsystem N the pair {l_3N, l_{3N+1}};
    m // 3 lands every lambda in the right one.
    """
    if not 1 <= m <= 3 * N + 1:
        raise ValueError("lambda index out of range")
    return m // 3


def lambda_state(graph: CouplingGraph, m: int) -> np.ndarray:
    """Amplitude vector of lambda_m over the prototype's site order."""
    N = prototype_size(graph)
    if not 1 <= m <= 3 * N + 1:
        raise ValueError("lambda index out of range")
    v = np.zeros(graph.n_sites, dtype=complex)
    if m % 3 == 1:
        v[graph.index[site_index(m)]] = 1.0
    elif m % 3 == 2:
        v[graph.index[site_index(m)]] = 1 / SQRT2
        v[graph.index[site_index(m + 1)]] = 1 / SQRT2
    else:
        v[graph.index[site_index(m - 1)]] = 1 / SQRT2
        v[graph.index[site_index(m)]] = -1 / SQRT2
    return v


def v_pair_basis(net: TiledNetwork) -> BasisMap:
    """Basis splitting each shared pair into the two adjacent blocks' ports.

    Every column is tagged by its owning block; within a block, columns
    follow the star template's site order, so the transformed Hamiltonian
    is a direct sum of copies of the template star.
    """
    graph = net.graph
    template = net.template
    n = graph.n_sites
    cols = []
    tags = []
    for block in net.spec.blocks():
        for star_site in template.graph.sites:
            v = np.zeros(n, dtype=complex)
            if star_site == template.center:
                v[graph.index[site_center(block)]] = 1.0
            else:
                _, _, _, branch, depth = star_site.key
                if depth == 1:
                    ref = net.port_map[(block, branch)]
                    for s, a in ref.amplitudes():
                        v[graph.index[s]] = a
                else:
                    v[graph.index[site_branch(block, branch, depth)]] = 1.0
            cols.append(v)
            tags.append((block, star_site.label))
    return BasisMap(graph=graph, matrix=np.array(cols).T, tags=tuple(tags))


# ---------------------------------------------------------------------------
# Network JSON
# ---------------------------------------------------------------------------

def network_to_json(graph: CouplingGraph, meta: dict | None = None) -> dict:
    return {
        "sites": [{"id": s.label} for s in graph.sites],
        "edges": [{"u": u.label, "v": v.label, "J": J} for u, v, J in graph.edges],
        "meta": dict(meta or {}),
    }


def parse_site_label(label: str) -> SiteId:
    """Rebuild the structured SiteId from its canonical label."""
    if "." not in label and not label.startswith("b("):
        if label == "c":
            return site_center(())
        if not label.isdigit():
            raise ValueError("unparseable site label %r" % label)
        return site_index(int(label))
    block = ()
    rest = label
    if label.startswith("b("):
        blk, rest = label.split(").", 1)
        block = tuple(int(x) for x in blk[2:].split(","))
    if rest == "c":
        return site_center(block)
    if rest.startswith("br"):
        br, dep = rest.split(".")
        return site_branch(block, int(br[2:]), int(dep[1:]))
    if rest.startswith("l"):
        br, member = rest.split(".")
        return site_pair(block, int(br[1:]), member)
    raise ValueError("unparseable site label %r" % label)


def network_from_json(doc: dict) -> CouplingGraph:
    sites = [parse_site_label(s["id"]) for s in doc["sites"]]
    edges = [
        (parse_site_label(e["u"]), parse_site_label(e["v"]), float(e["J"]))
        for e in doc["edges"]
    ]
    return _make_graph(sites, edges)
