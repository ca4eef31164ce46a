import json
import math

import pytest

from spinroute import cli, net
from spinroute.cli import main


def read(path):
    with open(path) as fh:
        return json.load(fh)


class TestBuild:
    def test_chain_of_eight(self, tmp_path, capsys):
        out = tmp_path / "net.json"
        rc = main(["build", "--lattice", "chain", "--extent", "8",
                   "--chain-length", "5", "--out", str(out)])
        assert rc == 0
        assert "8 blocks" in capsys.readouterr().out
        doc = read(out)
        assert doc["meta"] == {"kind": "chain", "M": 5, "d": 1, "extent": [8]}

    def test_triangular_uniform_modulus_reported(self, tmp_path, capsys):
        out = tmp_path / "net.json"
        rc = main(["build", "--lattice", "triangular", "--extent", "4,4",
                   "--chain-length", "5", "--out", str(out)])
        assert rc == 0
        assert "|J| in [1.0, 1.0]" in capsys.readouterr().out

    def test_even_m_usage_error(self, tmp_path):
        rc = main(["build", "--lattice", "square", "--extent", "2,2",
                   "--chain-length", "4", "--out", str(tmp_path / "x.json")])
        assert rc == 2

    def test_unknown_flag_rejected(self, tmp_path):
        rc = main(["build", "--lattice", "chain", "--extent", "2",
                   "--chain-length", "5", "--out", str(tmp_path / "x.json"),
                   "--bogus", "1"])
        assert rc == 2

    def test_roundtrip_bit_identical(self, tmp_path):
        out = tmp_path / "net.json"
        main(["build", "--lattice", "square", "--extent", "2,2",
              "--chain-length", "5", "--out", str(out)])
        doc = read(out)
        tiled = net.tile_network(net.LatticeSpec("square", (2, 2)), net.build_star_block(5, 2))
        rebuilt = net.network_from_json(doc)
        assert rebuilt.sites == tiled.graph.sites
        assert rebuilt.edges == tiled.graph.edges  # J values bit-identical

    def test_rebuild_bit_identical_file(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            main(["build", "--lattice", "triangular", "--extent", "2,2",
                  "--chain-length", "5", "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()


class TestRoute:
    def _build(self, tmp_path):
        out = tmp_path / "net.json"
        main(["build", "--lattice", "square", "--extent", "2,2",
              "--chain-length", "5", "--out", str(out)])
        return out

    def test_valid_pair(self, tmp_path):
        netfile = self._build(tmp_path)
        sched = tmp_path / "sched.json"
        report = tmp_path / "report.json"
        rc = main(["route", "--net", str(netfile),
                   "--from", "b(0,0).br3.d1", "--to", "b(1,1).br1.d1",
                   "--out", str(sched), "--report", str(report)])
        assert rc == 0
        rep = read(report)
        assert rep["fidelity"] >= 1 - 1e-9
        assert rep["path"][0] == [0, 0] and rep["path"][-1] == [1, 1]
        assert "calibration" in rep

    def test_same_site_empty_schedule(self, tmp_path):
        netfile = self._build(tmp_path)
        sched = tmp_path / "sched.json"
        report = tmp_path / "report.json"
        rc = main(["route", "--net", str(netfile),
                   "--from", "b(0,0).br3.d1", "--to", "b(0,0).br3.d1",
                   "--out", str(sched), "--report", str(report)])
        assert rc == 0
        assert read(sched) == {"steps": []}
        assert read(report)["duration"] == 0.0

    def test_fault_wall_exit_3(self, tmp_path):
        out = tmp_path / "net.json"
        main(["build", "--lattice", "square", "--extent", "3,3",
              "--chain-length", "5", "--out", str(out)])
        rc = main(["route", "--net", str(out),
                   "--from", "b(0,0).br3.d1", "--to", "b(2,2).br1.d1",
                   "--faults", "1,0;1,1;1,2",
                   "--out", str(tmp_path / "s.json")])
        assert rc == 3


class TestSimulate:
    def test_identity_schedule(self, tmp_path):
        netfile = tmp_path / "net.json"
        main(["build", "--lattice", "chain", "--extent", "2",
              "--chain-length", "5", "--out", str(netfile)])
        sched = tmp_path / "sched.json"
        sched.write_text('{"steps": []}')
        report = tmp_path / "rep.json"
        rc = main(["simulate", "--net", str(netfile), "--sched", str(sched),
                   "--input", "b(0).br2.d1", "--target", "b(0).br2.d1",
                   "--report", str(report)])
        assert rc == 0
        assert read(report)["fidelity"] == 1.0

    def test_replay_matches_route_report(self, tmp_path):
        netfile = tmp_path / "net.json"
        main(["build", "--lattice", "chain", "--extent", "3",
              "--chain-length", "5", "--out", str(netfile)])
        sched = tmp_path / "sched.json"
        report = tmp_path / "rep.json"
        main(["route", "--net", str(netfile),
              "--from", "b(0).br2.d1", "--to", "b(2).br1.d1",
              "--out", str(sched), "--report", str(report)])
        sim1 = tmp_path / "sim1.json"
        sim2 = tmp_path / "sim2.json"
        for target in (sim1, sim2):
            rc = main(["simulate", "--net", str(netfile), "--sched", str(sched),
                       "--input", "b(0).br2.d1", "--target", "b(2).br1.d1",
                       "--report", str(target)])
            assert rc == 0
        assert read(sim1)["fidelity"] == pytest.approx(read(report)["fidelity"], abs=1e-12)
        # determinism: bit-identical state dumps across runs
        assert sim1.read_text() == sim2.read_text()

    def test_k2_joint_input(self, tmp_path):
        netfile = tmp_path / "net.json"
        main(["build", "--lattice", "chain", "--extent", "2",
              "--chain-length", "5", "--out", str(netfile)])
        sched = tmp_path / "sched.json"
        sched.write_text('{"steps": [{"evolve": 0.0}]}')
        report = tmp_path / "rep.json"
        rc = main(["simulate", "--net", str(netfile), "--sched", str(sched),
                   "--input", "b(0).br2.d1;b(1).br1.d1", "--k", "2",
                   "--target", "b(0).br2.d1;b(1).br1.d1",
                   "--report", str(report)])
        assert rc == 0
        assert read(report)["fidelity"] == pytest.approx(1.0)


class TestVerifySuites:
    @pytest.mark.parametrize("suite", ["prototype", "star", "tiling", "commutator"])
    def test_suites_pass(self, suite, capsys):
        rc = main(["verify", "--suite", suite])
        doc = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert doc["pass"] is True
        assert doc["checks"]

    def test_all_suite(self, capsys):
        rc = main(["verify", "--suite", "all"])
        doc = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert doc["pass"] is True


class TestPercolate:
    def test_p_zero(self, capsys):
        rc = main(["percolate", "--lattice", "triangular", "--size", "16",
                   "--p", "0", "--trials", "10", "--seed", "1"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["spanning"] == 0.0

    def test_p_one(self, capsys):
        rc = main(["percolate", "--lattice", "triangular", "--size", "16",
                   "--p", "1", "--trials", "10", "--seed", "1"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["spanning"] == 1.0

    def test_env_seed_override(self, capsys, monkeypatch):
        monkeypatch.setenv("SPINROUTE_SEED", "77")
        rc = main(["percolate", "--lattice", "square", "--size", "16",
                   "--p", "0.5", "--trials", "20", "--seed", "1"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["seed"] == 77


class TestEntangle:
    @pytest.mark.parametrize("d", [2, 4])
    def test_even_d(self, tmp_path, d):
        out = tmp_path / "sched.json"
        rc = main(["entangle", "--chain-length", "5", "--branches", str(d),
                   "--out", str(out)])
        assert rc == 0
        doc = read(out)
        evolves = [s["evolve"] for s in doc["steps"] if "evolve" in s]
        assert len(evolves) == 2 * d

    def test_odd_d_usage_error(self, tmp_path):
        rc = main(["entangle", "--chain-length", "5", "--branches", "3",
                   "--out", str(tmp_path / "x.json")])
        assert rc == 2
