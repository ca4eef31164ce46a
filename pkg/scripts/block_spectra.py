#!/usr/bin/env python3
"""Print star-block calibration constants and reflection residuals.

Shows the d-independence of the transfer time and the measured coupling
coefficient of the two-port commutator witness.
"""

from spinroute import compiler, net, verify


def main():
    print("%3s %3s  %18s  %12s  %12s  %10s" % ("M", "d", "t0", "reflection", "commutator", "4/d"))
    for M, d in ((5, 1), (5, 2), (5, 3), (5, 4), (7, 2), (9, 3)):
        block = net.build_star_block(M, d)
        cal = compiler.calibrate_block(block)
        rep = verify.check_star_reflection(block, cal)
        if d >= 2:
            com = compiler.commutator_report(block, 1, 2)["coefficient"]
        else:
            com = float("nan")
        print(
            "%3d %3d  %18.15f  %12.3e  %12.6f  %10.6f"
            % (M, d, cal.t0, rep.residual, com, 4 / d)
        )


if __name__ == "__main__":
    main()
