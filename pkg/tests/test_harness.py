import csv

import pytest

from pnlw import io
from pnlw.harness import (
    ACCEPTANCE, CATALOG, TOOLS, Check, ManifestError, RunManifest, list_experiments,
    run_experiment)

FAST = {"parseval": {"n_max": 6}, "kernel-constancy": {"n_max": 6},
        "haar-orthogonality": {"N_list": [2, 10]}}


def files(run_dir):
    return {p.name: p.read_bytes() for p in sorted(run_dir.iterdir())}


class TestManifest:
    def test_sigma_named(self):
        with pytest.raises(ManifestError) as err:
            RunManifest("tail-experiment", {"sigma": 0.5}).validate()
        assert err.value.fields == ["sigma"]
        assert "sigma" in str(err.value)

    def test_every_problem_listed(self):
        with pytest.raises(ManifestError) as err:
            RunManifest("simulate", {"sigma": -1, "dt": 0, "bogus": 1}, seed=-2).validate()
        assert {"sigma", "dt", "bogus", "seed"} <= set(err.value.fields)

    def test_unknown_experiment(self):
        with pytest.raises(ManifestError):
            RunManifest("no-such-id").validate()

    def test_divergent_profile(self):
        with pytest.raises(ManifestError) as err:
            RunManifest("simulate", {"sigma": 0.25, "alpha": 1.7}).validate()
        assert "alpha" in err.value.fields

    def test_round_trip(self, tmp_path):
        m = RunManifest("simulate", {"n_max": 3}, seed=5, statement="probe")
        io.write_json(tmp_path / "m.json", m.to_dict())
        back = RunManifest.from_json(tmp_path / "m.json")
        # the stored form carries the resolved parameters
        assert back.to_dict() == m.to_dict() and back.content_hash() == m.content_hash()

    def test_hash_depends_on_content(self):
        a = RunManifest("simulate", {"n_max": 3}, seed=1)
        assert a.content_hash() != RunManifest("simulate", {"n_max": 3}, seed=2).content_hash()
        assert a.content_hash() == RunManifest("simulate", {"n_max": 3}, seed=1).content_hash()

    def test_defaults_merged(self):
        p = RunManifest("simulate", {"n_max": 3}).resolved()
        assert p["n_max"] == 3 and p["mode"] == TOOLS["simulate"].defaults["mode"]


class TestRuns:
    @pytest.mark.parametrize("eid", ["parseval", "simulate", "tail-experiment"])
    def test_byte_identical(self, tmp_path, eid):
        params = {"simulate": {"n_max": 3, "t_span": [0.0, 1.0]},
                  "tail-experiment": {"n_max": 3, "draws": 200}}.get(eid, FAST.get(eid, {}))
        m = RunManifest(eid, params, seed=11)
        a = run_experiment(m, tmp_path / "a")
        b = run_experiment(m, tmp_path / "b")
        assert a.run_dir.name == b.run_dir.name
        assert files(a.run_dir) == files(b.run_dir)

    def test_seed_changes_output(self, tmp_path):
        params = {"n_max": 3, "draws": 200}
        a = run_experiment(RunManifest("tail-experiment", params, seed=1), tmp_path)
        b = run_experiment(RunManifest("tail-experiment", params, seed=2), tmp_path)
        assert files(a.run_dir)["tail.csv"] != files(b.run_dir)["tail.csv"]

    def test_result_document(self, tmp_path):
        res = run_experiment(RunManifest("parseval", FAST["parseval"]), tmp_path)
        doc = io.read_json(res.run_dir / "result.json")
        assert doc["passed"] is True and doc["failures"] == []
        assert io.read_json(res.run_dir / "manifest.json")["experiment"] == "parseval"

    def test_suite_matches_individual_runs(self, tmp_path):
        ids = list(FAST)
        suite = run_experiment(RunManifest("all-acceptance", {"ids": ids}, seed=4), tmp_path)
        with open(suite.paths["summary"], newline="") as fh:
            rows = list(csv.DictReader(fh))
        for eid in ids:
            alone = run_experiment(RunManifest(eid, seed=4), tmp_path / "alone")
            mine = [r for r in rows if r["experiment"] == eid]
            assert [r["invariant"] for r in mine] == [c.invariant for c in alone.checks]
            assert [r["passed"] == "1" for r in mine] == [c.passed for c in alone.checks]
        assert suite.passed == all(r["passed"] == "1" for r in rows)

    def test_failure_names_invariant(self, tmp_path):
        res = run_experiment(RunManifest("parseval", {"n_max": 4, "tol": 1e-300}), tmp_path)
        assert not res.passed and res.failures
        assert all(f in res.report() for f in res.failures)


class TestCatalog:
    def test_stable_and_non_empty(self):
        a, b = list_experiments(), list_experiments()
        assert a and list(a) == list(b)

    def test_one_op_per_id(self):
        for eid, (statement, op) in list_experiments().items():
            module, _, name = op.partition(".")
            assert statement and module and name

    def test_every_criterion_reachable(self):
        assert sorted(ACCEPTANCE) == list(range(1, 9))
        owners = [eid for ids in ACCEPTANCE.values() for eid in ids]
        assert len(owners) == len(set(owners)) and set(owners) <= set(CATALOG)


def test_check_line():
    c = Check("x-bound", False, 2.0, 1.0, "<", "note")
    assert c.line() == "FAIL x-bound: 2 < 1 (note)"
