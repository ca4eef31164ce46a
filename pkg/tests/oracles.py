"""Independent test oracles built straight from Pauli algebra."""

import itertools

import numpy as np

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def full_spin_hamiltonian(graph):
    """1/2 sum J (XX + YY) over the full 2^n spin space.

    Site i occupies bit i counted from the left (value 2^(n-1-i)), matching
    the ordering of configuration tuples."""
    n = graph.n_sites
    H = np.zeros((2**n, 2**n), dtype=complex)
    for u, v, J in graph.edges:
        for P in ("X", "Y"):
            ops = [PAULI["I"]] * n
            ops[graph.index[u]] = PAULI[P]
            ops[graph.index[v]] = PAULI[P]
            term = ops[0]
            for op in ops[1:]:
                term = np.kron(term, op)
            H += 0.5 * J * term
    return H


def weight_k_indices(n, k):
    """Bitstring indices of weight-k states, in sector-basis order."""
    out = []
    for config in itertools.combinations(range(n), k):
        out.append(sum(1 << (n - 1 - i) for i in config))
    return out


def random_connected_graph(rng, n_sites, extra_edges=2):
    """Random spanning tree plus extra chords, with signed couplings."""
    from spinroute import net

    sites = tuple(net.site_index(i) for i in range(1, n_sites + 1))
    edges = {}
    for i in range(1, n_sites):
        j = int(rng.integers(0, i))
        J = float(rng.uniform(0.2, 2.0)) * (1 if rng.random() < 0.5 else -1)
        edges[(j, i)] = J
    for _ in range(extra_edges):
        pair = rng.choice(n_sites, size=2, replace=False)
        i, j = int(pair.min()), int(pair.max())
        if (i, j) not in edges and i != j:
            edges[(i, j)] = float(rng.uniform(0.2, 2.0))
    return net.CouplingGraph(
        sites=sites, edges=tuple((sites[i], sites[j], J) for (i, j), J in edges.items())
    )
