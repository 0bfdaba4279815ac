import json

import pytest

from morselab import cli


def run_cfg(cfg, out):
    return cli.run(cfg, out), json.loads((out / "summary.json").read_text())


def test_asym_run_and_determinism(tmp_path):
    cfg = {"experiment": "asym",
           "model": {"kind": "proj_product", "factors": [1, 1]},
           "class": [2, 3], "q": 0, "kmax": 60, "lambda": 2}
    st1, summary = run_cfg(cfg, tmp_path / "a")
    st2, _ = run_cfg(cfg, tmp_path / "b")
    assert st1 == st2 == 0
    assert abs(summary["limit"] - 12.0) < 0.2
    assert (tmp_path / "a" / "sequence.csv").read_bytes() \
        == (tmp_path / "b" / "sequence.csv").read_bytes()
    assert (tmp_path / "a" / "summary.json").read_bytes() \
        == (tmp_path / "b" / "summary.json").read_bytes()
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["content_hash"] == json.loads(
        (tmp_path / "b" / "manifest.json").read_text())["content_hash"]
    assert "wall_time_s" in man and "versions" in man


def test_invalid_configs(tmp_path):
    bad_q = {"experiment": "morse", "model": {"kind": "hirzebruch_f1"},
             "class": [3, 1], "q": 5, "resolution": 8}
    st, summary = run_cfg(bad_q, tmp_path / "badq")
    assert st == 2 and "schema" in summary["error"]

    bad_model = {"experiment": "asym", "model": {"kind": "mystery"},
                 "class": [1], "q": 0}
    st2, summary2 = run_cfg(bad_model, tmp_path / "badm")
    assert st2 == 2

    bad_lattice = {"experiment": "asym",
                   "model": {"kind": "flat_torus", "n": 1,
                             "lattice": [[1, 0], [2, 0]]},
                   "class": {"matrix_re": [[2]]}, "q": 0, "kmax": 20}
    st3, _ = run_cfg(bad_lattice, tmp_path / "badl")
    assert st3 == 2

    missing = {"experiment": "asym",
               "model": {"kind": "proj_product", "factors": [1, 1]}}
    st4, _ = run_cfg(missing, tmp_path / "miss")
    assert st4 == 2


def test_failing_assertion_names_invariant(tmp_path):
    # an impossible tolerance forces a named failure and exit status 1
    cfg = {"experiment": "morse",
           "model": {"kind": "hirzebruch_f1"},
           "class": [3, 1], "q": 0, "resolution": 8, "tolerance": 1e-12}
    st, summary = run_cfg(cfg, tmp_path / "fail")
    assert st == 1
    assert summary["failed_assertions"] == ["morse_matches_growth_limit"]


def test_morse_with_potential_coefficients(tmp_path):
    cfg = {"experiment": "morse",
           "model": {"kind": "proj_product", "factors": [1, 1]},
           "class": [2, -3], "q": 1, "resolution": 48,
           "potential_coeffs": [0.02, -0.01, 0.0, 0.01, 0.0],
           "tolerance": 0.01}
    st, summary = run_cfg(cfg, tmp_path / "pot")
    assert st == 0
    assert abs(summary["value"] - 12.0) <= 0.01 * 12.0


def test_torus_class_config(tmp_path):
    cfg = {"experiment": "asym",
           "model": {"kind": "flat_torus", "n": 2},
           "class": {"matrix_re": [[1, 0], [0, -1]]}, "q": 1, "kmax": 20}
    st, summary = run_cfg(cfg, tmp_path / "t")
    assert st == 0
    assert abs(summary["limit"] - 2.0) < 1e-9


def test_optimize_bound_violation_is_named_failure(tmp_path, monkeypatch):
    # force the guard to fire: a fabricated target above the true value
    from morselab import optimizer as opt

    original = opt.MorseObjective.__init__

    def patched(self, ns_class, q, grid, basis=None, target=None,
                soft_width=0.0, guard=True):
        original(self, ns_class, q, grid, basis, 100.0, soft_width, guard)

    monkeypatch.setattr(opt.MorseObjective, "__init__", patched)
    cfg = {"experiment": "optimize",
           "model": {"kind": "proj_product", "factors": [1, 1]},
           "class": [2, -3], "q": 1, "resolution": 16, "budget": 100,
           "restarts": 1}
    st, summary = run_cfg(cfg, tmp_path / "viol")
    assert st == 1
    assert summary["failed_assertions"] == ["no_bound_violation"]


def test_report_index_idempotent_and_warns(tmp_path):
    cfg = {"experiment": "asym",
           "model": {"kind": "proj_product", "factors": [1, 1]},
           "class": [2, -3], "q": 1, "kmax": 40}
    cli.run(cfg, tmp_path / "r1")
    cli.run(cfg, tmp_path / "r2")  # duplicate content, deduplicated
    corrupt = tmp_path / "broken"
    corrupt.mkdir()
    (corrupt / "manifest.json").write_text("{not json")
    idx1 = cli.report_index(tmp_path)
    idx2 = cli.report_index(tmp_path)
    assert idx1["runs"] == 1
    assert len(idx1["warnings"]) == 1
    assert idx1["entries"] == idx2["entries"]


def test_report_index_empty(tmp_path):
    idx = cli.report_index(tmp_path)
    assert idx["runs"] == 0 and idx["warnings"] == []


def test_main_subcommands(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(
        {"model": {"kind": "proj_product", "factors": [1, 1]},
         "class": [2, 3], "q": 0, "kmax": 40}))
    rc = cli.main(["asym", "--config", str(cfg_path),
                   "--out", str(tmp_path / "out"), "--seed", "3"])
    assert rc == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["seed"] == 3

    rc2 = cli.main(["report", "--out", str(tmp_path)])
    assert rc2 == 0
    assert (tmp_path / "index.json").exists()

    missing = cli.main(["asym", "--config", str(tmp_path / "nope.json"),
                        "--out", str(tmp_path / "x")])
    assert missing == 2


def test_seed_changes_outputs_only_via_rng(tmp_path):
    cfg = {"experiment": "conjecture", "model": {"kind": "hirzebruch_f1"},
           "class": [2, -1], "resolution": 8, "samples": 3,
           "cluster_levels": 4}
    st1, s1 = run_cfg({**cfg, "seed": 1}, tmp_path / "s1")
    st1b, s1b = run_cfg({**cfg, "seed": 1}, tmp_path / "s1b")
    st2, s2 = run_cfg({**cfg, "seed": 2}, tmp_path / "s2")
    assert st1 == st1b == st2 == 0
    assert (tmp_path / "s1" / "samples.csv").read_bytes() \
        == (tmp_path / "s1b" / "samples.csv").read_bytes()
    assert (tmp_path / "s1" / "samples.csv").read_bytes() \
        != (tmp_path / "s2" / "samples.csv").read_bytes()
