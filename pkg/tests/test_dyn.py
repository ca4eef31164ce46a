import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from oracles import full_spin_hamiltonian, random_connected_graph, weight_k_indices
from spinroute import dyn, net
from spinroute.compiler import calibrate_block

SQRT2 = math.sqrt(2)


def two_site_graph(J=1.0):
    a, b = net.site_index(1), net.site_index(2)
    return net.CouplingGraph(sites=(a, b), edges=((a, b, J),))


def uniform_chain(n, J):
    sites = tuple(net.site_index(i) for i in range(1, n + 1))
    edges = tuple((sites[i], sites[i + 1], J) for i in range(n - 1))
    return net.CouplingGraph(sites=sites, edges=edges)


random_graph = random_connected_graph


class TestSectorHamiltonian:
    def test_two_site(self):
        H = dyn.sector_hamiltonian(two_site_graph(), 1).matrix
        np.testing.assert_array_equal(H, [[0, 1], [1, 0]])

    def test_prototype_n1_signed_pattern(self):
        g = net.build_prototype_1d(1)
        H = dyn.sector_hamiltonian(g, 1).matrix
        np.testing.assert_array_equal(H, g.adjacency())
        assert H[g.index[net.site_index(3)], g.index[net.site_index(4)]] == -1.0

    def test_path4_k2_vs_full_spin(self):
        g = uniform_chain(4, 1.0)
        H2 = dyn.sector_hamiltonian(g, 2).matrix
        assert H2.shape == (6, 6)
        full = full_spin_hamiltonian(g)
        idx = weight_k_indices(4, 2)
        np.testing.assert_array_equal(H2, full[np.ix_(idx, idx)].real)

    def test_k0_is_zero(self):
        H = dyn.sector_hamiltonian(two_site_graph(), 0).matrix
        np.testing.assert_array_equal(H, [[0.0]])

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            dyn.sector_hamiltonian(two_site_graph(), 3)

    @pytest.mark.parametrize("k", [1, 2])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_sector_equals_projection(self, k, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, int(rng.integers(4, 8)))
        n = g.n_sites
        Hk = dyn.sector_hamiltonian(g, k).matrix
        full = full_spin_hamiltonian(g)
        idx = weight_k_indices(n, k)
        np.testing.assert_array_equal(Hk, full[np.ix_(idx, idx)].real)


class TestEvolve:
    def test_t0_identity(self):
        g = two_site_graph()
        cache = dyn.spectral_cache(g, 1)
        basis = dyn.SectorBasis(graph=g, k=1)
        psi = basis.basis_state([net.site_index(1)])
        out = dyn.evolve(psi, 0.0, cache)
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes)

    def test_two_site_quarter_period(self):
        g = two_site_graph(1.0)
        cache = dyn.spectral_cache(g, 1)
        basis = dyn.SectorBasis(graph=g, k=1)
        out = dyn.evolve(basis.basis_state([net.site_index(1)]), math.pi / 2, cache)
        np.testing.assert_allclose(out.amplitudes, [0, -1j], atol=1e-14)

    def test_uniform_3chain_mirror(self):
        g = uniform_chain(3, SQRT2)
        cache = dyn.spectral_cache(g, 1)
        basis = dyn.SectorBasis(graph=g, k=1)
        out = dyn.evolve(basis.basis_state([net.site_index(1)]), math.pi / 2, cache)
        np.testing.assert_allclose(out.amplitudes, [0, 0, -1], atol=1e-14)

    def test_dimension_mismatch(self):
        g = two_site_graph()
        cache = dyn.spectral_cache(g, 1)
        other = dyn.SectorBasis(graph=uniform_chain(3, 1.0), k=1)
        with pytest.raises(ValueError):
            dyn.evolve(other.basis_state([net.site_index(1)]), 1.0, cache)

    @given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=0, max_value=100))
    @settings(max_examples=30, deadline=None)
    def test_unitarity(self, seed, t):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, 6)
        cache = dyn.spectral_cache(g, 1)
        basis = dyn.SectorBasis(graph=g, k=1)
        vec = rng.normal(size=6) + 1j * rng.normal(size=6)
        vec /= np.linalg.norm(vec)
        out = dyn.evolve(basis.from_site_vector(vec), t, cache)
        assert out.norm == pytest.approx(1.0, abs=1e-10)

    @given(
        st.integers(min_value=0, max_value=10_000),
        st.floats(min_value=0, max_value=20),
        st.floats(min_value=0, max_value=20),
    )
    @settings(max_examples=30, deadline=None)
    def test_semigroup(self, seed, s, t):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, 5)
        cache = dyn.spectral_cache(g, 1)
        basis = dyn.SectorBasis(graph=g, k=1)
        vec = rng.normal(size=5) + 1j * rng.normal(size=5)
        vec /= np.linalg.norm(vec)
        psi = basis.from_site_vector(vec)
        a = dyn.evolve(dyn.evolve(psi, s, cache), t, cache)
        b = dyn.evolve(psi, s + t, cache)
        np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_scaling_squaring_expm(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(3, 21))
        g = random_graph(rng, n, extra_edges=3)
        t = float(rng.uniform(0.1, 5.0))
        cache = dyn.spectral_cache(g, 1)
        U_spec = cache.propagator(t)
        U_ref = expm(-1j * g.adjacency() * t)
        np.testing.assert_allclose(U_spec, U_ref, atol=1e-9)


class TestPhaseSets:
    def test_pi_on_pair_member(self):
        g = net.build_prototype_1d(1)
        basis = dyn.SectorBasis(graph=g, k=1)
        state = basis.from_site_vector(net.lambda_state(g, 2))
        out = dyn.apply_phase_set(state, {net.site_index(3): math.pi})
        np.testing.assert_allclose(out.amplitudes, net.lambda_state(g, 3))

    def test_zero_identity(self):
        g = net.build_prototype_1d(1)
        basis = dyn.SectorBasis(graph=g, k=1)
        state = basis.basis_state([net.site_index(2)])
        out = dyn.apply_phase_set(state, {net.site_index(2): 0.0})
        np.testing.assert_array_equal(out.amplitudes, state.amplitudes)

    def test_unknown_site(self):
        g = net.build_prototype_1d(1)
        basis = dyn.SectorBasis(graph=g, k=1)
        with pytest.raises(ValueError):
            dyn.apply_phase_set(basis.basis_state([net.site_index(1)]), {net.site_index(9): 1.0})

    def test_k2_multiplicative_vs_full_spin(self):
        g = uniform_chain(4, 1.0)
        basis = dyn.SectorBasis(graph=g, k=2)
        theta = 0.7
        pulsed = net.site_index(2)
        state = basis.basis_state([net.site_index(2), net.site_index(4)])
        out = dyn.apply_phase_set(state, {pulsed: theta})
        # full-spin oracle: Z^(theta) = diag(1, e^{i theta}) on the pulsed qubit
        n = 4
        zt = np.array([[1, 0], [0, np.exp(1j * theta)]])
        ops = [np.eye(2, dtype=complex)] * n
        ops[g.index[pulsed]] = zt
        full = ops[0]
        for op in ops[1:]:
            full = np.kron(full, op)
        idx = weight_k_indices(n, 2)
        vec = np.zeros(2**n, dtype=complex)
        vec[idx[basis.config_index[tuple(sorted((g.index[net.site_index(2)], g.index[net.site_index(4)])))]]] = 1.0
        np.testing.assert_allclose(out.amplitudes, (full @ vec)[idx], atol=1e-14)

    def test_double_occupancy_composes(self):
        g = uniform_chain(4, 1.0)
        basis = dyn.SectorBasis(graph=g, k=2)
        state = basis.basis_state([net.site_index(1), net.site_index(2)])
        out = dyn.apply_phase_set(
            state, {net.site_index(1): 0.3, net.site_index(2): 0.4}
        )
        i = basis.config_index[(0, 1)]
        assert out.amplitudes[i] == pytest.approx(np.exp(0.7j))


class TestSchedules:
    def test_empty_identity(self):
        g = two_site_graph()
        cache = dyn.spectral_cache(g, 1)
        basis = dyn.SectorBasis(graph=g, k=1)
        psi = basis.basis_state([net.site_index(1)])
        out = dyn.run_schedule(psi, dyn.PulseSchedule(), cache)
        np.testing.assert_array_equal(out.amplitudes, psi.amplitudes)

    def test_block_hop_moves_one_subsystem(self):
        g = net.build_prototype_1d(2)
        cache = dyn.spectral_cache(g, 1)
        basis = dyn.SectorBasis(graph=g, k=1)
        sched = dyn.PulseSchedule(
            steps=(
                dyn.Evolve(math.pi / 2),
                dyn.PhaseSet.on({net.site_index(3): math.pi, net.site_index(6): math.pi}),
                dyn.Evolve(math.pi / 2),
            )
        )
        start = basis.from_site_vector(net.lambda_state(g, 3))  # left end of subsystem 1
        out = dyn.run_schedule(start, sched, cache)
        # all weight must sit in subsystem 2's span {lambda_6, lambda_7}
        w = sum(
            abs(np.vdot(net.lambda_state(g, m), out.amplitudes)) ** 2 for m in (6, 7)
        )
        assert w == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("site", [1, 4, 5, 6, 10, 13])
    def test_mirror_undoes_injection(self, site):
        # the reversed, phase-negated mirror of an injection schedule
        # returns the packet to its source site (up to a global phase)
        from spinroute.compiler import compile_injection_1d

        g = net.build_prototype_1d(4)
        cache = dyn.spectral_cache(g, 1)
        basis = dyn.SectorBasis(graph=g, k=1)
        inj = compile_injection_1d(g, site)
        psi = basis.basis_state([net.site_index(site)])
        out = dyn.run_schedule(
            dyn.run_schedule(psi, inj, cache), inj.reversed_negated(), cache
        )
        assert dyn.fidelity_up_to_phase(psi, out) == pytest.approx(1.0, abs=1e-12)

    def test_mirror_inverts_pulse_only_schedules(self):
        g = net.build_prototype_1d(1)
        cache = dyn.spectral_cache(g, 1)
        basis = dyn.SectorBasis(graph=g, k=1)
        sched = dyn.PulseSchedule(
            steps=(
                dyn.PhaseSet.on({net.site_index(2): 0.7, net.site_index(3): -1.1}),
                dyn.PhaseSet.on({net.site_index(4): 2.2}),
            )
        )
        rng = np.random.default_rng(5)
        vec = rng.normal(size=4) + 1j * rng.normal(size=4)
        vec /= np.linalg.norm(vec)
        psi = basis.from_site_vector(vec)
        out = dyn.run_schedule(
            dyn.run_schedule(psi, sched, cache), sched.reversed_negated(), cache
        )
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-14)

    def test_duration_accounting(self):
        sched = dyn.PulseSchedule(
            steps=(dyn.Evolve(1.5), dyn.PhaseSet.on({net.site_index(1): 1.0}), dyn.Evolve(0.5))
        )
        assert sched.total_duration == 2.0
        assert sched.pulse_count == 1

    def test_angle_reduction(self):
        ps = dyn.PhaseSet.on({net.site_index(1): 3 * math.pi})
        assert ps.phases[0][1] == pytest.approx(math.pi)
        ps = dyn.PhaseSet.on({net.site_index(1): -math.pi})
        assert ps.phases[0][1] == pytest.approx(math.pi)

    def test_json_roundtrip(self):
        g = net.build_prototype_1d(1)
        sched = dyn.PulseSchedule(
            steps=(
                dyn.Evolve(math.pi / 2),
                dyn.PhaseSet.on({net.site_index(3): math.pi}),
            )
        )
        doc = sched.to_json()
        assert doc["steps"][0] == {"evolve": math.pi / 2}
        back = dyn.schedule_from_json(doc, g)
        assert back == sched


class TestFidelity:
    def test_identity(self):
        g = two_site_graph()
        basis = dyn.SectorBasis(graph=g, k=1)
        a = basis.basis_state([net.site_index(1)])
        assert dyn.fidelity_up_to_phase(a, a) == 1.0

    def test_global_phase_invariance(self):
        g = two_site_graph()
        basis = dyn.SectorBasis(graph=g, k=1)
        a = basis.basis_state([net.site_index(1)])
        b = dyn.ExcitationState(basis=basis, amplitudes=np.exp(0.73j) * a.amplitudes)
        assert dyn.fidelity_up_to_phase(a, b) == pytest.approx(1.0)

    def test_orthogonal(self):
        g = two_site_graph()
        basis = dyn.SectorBasis(graph=g, k=1)
        a = basis.basis_state([net.site_index(1)])
        b = basis.basis_state([net.site_index(2)])
        assert dyn.fidelity_up_to_phase(a, b) == 0.0


class TestTransferTime:
    def test_two_site_sqrt2(self):
        g = two_site_graph(SQRT2)
        t, f = dyn.transfer_time(g, net.site_index(1), net.site_index(2))
        assert f == pytest.approx(1.0, abs=1e-10)
        assert t == pytest.approx(math.pi / (2 * SQRT2), abs=1e-6)

    def test_m5_pst_chain(self):
        g = net.build_pst_chain(5)
        t, f = dyn.transfer_time(g, net.site_index(1), net.site_index(5))
        assert f == pytest.approx(1.0, abs=1e-10)
        assert t == pytest.approx(math.pi / SQRT2, abs=1e-6)

    def test_uniform_3chain(self):
        g = uniform_chain(3, SQRT2)
        t, f = dyn.transfer_time(g, net.site_index(1), net.site_index(3))
        assert f == pytest.approx(1.0, abs=1e-10)
        assert t == pytest.approx(math.pi / 2, abs=1e-6)

    def test_no_transfer_returns_none(self):
        # an asymmetric tree has no unit-fidelity end-to-end peak
        sites = tuple(net.site_index(i) for i in range(1, 5))
        edges = (
            (sites[0], sites[1], 1.0),
            (sites[1], sites[2], 0.7),
            (sites[1], sites[3], 1.3),
        )
        g = net.CouplingGraph(sites=sites, edges=edges)
        assert dyn.transfer_time(g, sites[0], sites[2], t_max=10.0) is None


class TestStarIdentities:
    @pytest.mark.parametrize("M,d", [(5, 2), (5, 3), (7, 2)])
    def test_reflection_with_sign_form(self, M, d):
        blk = net.build_star_block(M, d)
        cal = calibrate_block(blk)
        U = dyn.spectral_cache(blk.graph, 1).propagator(cal.t0)
        # build the reflection target from W states alone
        n = blk.graph.n_sites
        S = np.zeros((n, n), dtype=complex)
        for pos in range(1, M + 1):
            S += np.outer(net.w_state(blk, M + 1 - pos, 0), net.w_state(blk, pos, 0).conj())
        for pos in [p for p in range(1, M + 1) if p != (M + 1) // 2]:
            for k in range(1, d):
                w = net.w_state(blk, pos, k)
                S -= np.outer(w, w.conj())
        tr = np.trace(S.conj().T @ U)
        phase = tr / abs(tr)
        assert np.abs(U - phase * S).max() < 1e-9

    @pytest.mark.parametrize("M,d", [(5, 2), (5, 3), (7, 2)])
    def test_w0_transfer_and_k_sign(self, M, d):
        blk = net.build_star_block(M, d)
        cal = calibrate_block(blk)
        cache = dyn.spectral_cache(blk.graph, 1)
        basis = dyn.SectorBasis(graph=blk.graph, k=1)
        out = dyn.evolve(basis.from_site_vector(net.w_state(blk, 1, 0)), cal.t0, cache)
        assert abs(np.vdot(net.w_state(blk, M, 0), out.amplitudes)) == pytest.approx(
            1.0, abs=1e-10
        )
        if d > 1:
            out = dyn.evolve(basis.from_site_vector(net.w_state(blk, 1, 1)), cal.t0, cache)
            overlap = np.vdot(net.w_state(blk, 1, 1), out.amplitudes)
            assert abs(overlap) == pytest.approx(1.0, abs=1e-10)
            # same global phase as the k=0 reflection, with an extra -1
            ref = np.vdot(
                net.w_state(blk, M, 0),
                dyn.evolve(
                    basis.from_site_vector(net.w_state(blk, 1, 0)), cal.t0, cache
                ).amplitudes,
            )
            assert overlap / ref == pytest.approx(-1.0, abs=1e-9)

    @pytest.mark.parametrize("M,d", [(5, 2), (5, 3), (7, 2)])
    def test_phase_cycle_permutes_w(self, M, d):
        blk = net.build_star_block(M, d)
        basis = dyn.SectorBasis(graph=blk.graph, k=1)
        phases = {blk.port(0, j): 2 * math.pi * j / d for j in range(1, d + 1)}
        for k in range(d):
            state = basis.from_site_vector(net.w_state(blk, 1, k))
            out = dyn.apply_phase_set(state, phases)
            np.testing.assert_allclose(
                out.amplitudes, net.w_state(blk, 1, (k + 1) % d), atol=1e-14
            )
        # d applications are the identity
        state = basis.from_site_vector(net.w_state(blk, 1, 1 % d))
        for _ in range(d):
            state = dyn.apply_phase_set(state, phases)
        np.testing.assert_allclose(state.amplitudes, net.w_state(blk, 1, 1 % d), atol=1e-13)
