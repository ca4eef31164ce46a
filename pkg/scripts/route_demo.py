#!/usr/bin/env python3
"""Route packets across a faulty 3x3 block lattice and print the reports.

Builds the square (M=5, d=2) network, knocks out the center block, and
routes corner to corner; then sweeps every boundary-port pair of a 2x2
patch and prints the worst fidelity.
"""

import itertools
import json

from spinroute import compiler, net


def main():
    tiled = net.tile_network(net.LatticeSpec("square", (3, 3)), net.build_star_block(5, 2))
    src = tiled.port_map[((0, 0), 3)].sites[0]
    dst = tiled.port_map[((2, 2), 1)].sites[0]
    report = compiler.route_report(tiled, src, dst, faults={(1, 1)})
    print("corner-to-corner around a faulty center:")
    print(json.dumps(report, indent=2))

    small = net.tile_network(net.LatticeSpec("square", (2, 2)), net.build_star_block(5, 2))
    ports = [p[2] for p in small.boundary_ports()]
    worst = 1.0
    total = 0
    for a, b in itertools.permutations(ports, 2):
        rep = compiler.route_report(small, a, b)
        worst = min(worst, rep["fidelity"])
        total += 1
    print("\n2x2 sweep: %d ordered port pairs, worst fidelity %.15f" % (total, worst))


if __name__ == "__main__":
    main()
