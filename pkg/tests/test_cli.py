import csv
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tetradlogit import cli
from tetradlogit.dataio import DatasetBundle, Recipe, export_network, ingest
from tetradlogit.errors import IngestionError
from tetradlogit.estimators import EstimatorSpec, estimate
from tetradlogit.network import MISSING
from tetradlogit.simlab import DgpConfig, Homogeneous, draw_network

DATA = Path(__file__).resolve().parents[1] / "data" / "friendship"
RECIPES = ("gender=match:gender", "smokers=both:smoker", "program=match:program")
FLAGS = ["--nodes", str(DATA / "nodes.csv"), *[a for r in RECIPES for a in ("--recipe", r)],
         "--missing", "1", "--missing", "9"]


def wave(n=5):
    return ingest(DatasetBundle(str(DATA / f"wave{n}.csv"), str(DATA / "nodes.csv"),
                                tuple(Recipe.parse(r) for r in RECIPES), ("1", "9")))


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


def test_recipe_parse():
    assert Recipe.parse("g=match:gender") == Recipe("g", "match", "gender")
    for bad in ("g:match", "g=match", "g=cosine:x"):
        with pytest.raises(IngestionError):
            Recipe.parse(bad)


def test_fixture_ingest():
    net = wave()
    assert net.n_nodes == 32
    assert net.category_labels == (0, 2, 3, 4, 5)
    assert net.n_categories == 4
    assert net.covariate_names == ("gender", "smokers", "program")
    assert set(np.unique(net.outcomes[net.observed])) <= {0, 1, 2, 3, 4}
    X = net.covariates
    assert set(np.unique(X[net.observed])) <= {0.0, 1.0}


def test_match_recipe_on_same_gender_pair(tmp_path):
    nodes = write(tmp_path / "n.csv", ["node_id", "gender", "smoker"], [["a", "f", 1], ["b", "f", 1], ["c", "m", 0]])
    dyads = write(tmp_path / "d.csv", ["sender", "receiver", "outcome"], [["a", "b", 1], ["a", "c", 0], ["c", "a", 2]])
    net = ingest(DatasetBundle(dyads, nodes, (Recipe("g", "match", "gender"), Recipe("s", "both", "smoker"))))
    assert net.covariates[0, 1, 0] == 1.0 and net.covariates[0, 2, 0] == 0.0
    assert net.covariates[0, 1, 1] == 1.0 and net.covariates[2, 0, 1] == 0.0
    assert net.outcomes[1, 0] == MISSING


def test_numeric_recipes_and_dyadcol(tmp_path):
    nodes = write(tmp_path / "n.csv", ["node_id", "age"], [[1, 10], [2, 13], [3, 11]])
    dyads = write(tmp_path / "d.csv", ["sender", "receiver", "outcome", "dist"],
                  [[1, 2, 0, "0.5"], [2, 1, 1, "0.25"], [3, 1, 1, "1e-3"]])
    net = ingest(DatasetBundle(dyads, nodes, (Recipe("a", "absdiff", "age"), Recipe("s", "sqdiff", "age"),
                                              Recipe("d", "dyadcol", "dist"))))
    np.testing.assert_array_equal(net.covariates[0, 1], [3.0, 9.0, 0.5])
    assert net.covariates[2, 0, 2] == 1e-3


def test_node_order_without_nodes_file(tmp_path):
    dyads = write(tmp_path / "d.csv", ["sender", "receiver", "outcome"], [["10", "2", 1], ["2", "10", 0], ["3", "2", 1]])
    assert ingest(DatasetBundle(dyads)).node_ids == ("2", "3", "10")


@pytest.mark.parametrize("rows,nodes_rows,kw,match", [
    ([["a", "b", 1], ["a", "b", 0]], None, {}, "duplicate"),
    ([["a", "a", 1], ["a", "b", 0]], None, {}, "self"),
    ([["a", "b", 7], ["b", "a", 0]], None, {"categories": ("0", "1")}, r"\[7\]"),
    ([["a", "b", 1], ["b", "z", 0]], [["a", "1"], ["b", "0"]], {}, "missing from the nodes file"),
    ([["a", "b", 1], ["b", "a", 0]], [["a", "2"], ["b", "0"]], {"recipes": (Recipe("s", "both", "x"),)}, "not binary"),
    ([["a", "b", 1], ["b", "a", 0]], [["a", "2"], ["b", "0"]], {"recipes": (Recipe("s", "match", "nope"),)}, "no column"),
    ([["a", "b", 1], ["b", "a", 1]], None, {}, "at least two"),
    ([["a", "b", "x"], ["b", "a", 1]], None, {}, "not a number"),
])
def test_ingestion_errors(tmp_path, rows, nodes_rows, kw, match):
    dyads = write(tmp_path / "d.csv", ["sender", "receiver", "outcome"], rows)
    nodes = write(tmp_path / "n.csv", ["node_id", "x"], nodes_rows) if nodes_rows else None
    with pytest.raises(IngestionError, match=match):
        ingest(DatasetBundle(dyads, nodes, **kw))


@given(cats=st.lists(st.integers(0, 50), min_size=2, max_size=6, unique=True), seed=st.integers(0, 1000))
def test_remapping_preserves_order(tmp_path_factory, cats, seed):
    rng = np.random.default_rng(seed)
    ids = list(range(6))
    rows = [[i, j, rng.choice(cats)] for i in ids for j in ids if i != j]
    rows[0][2], rows[1][2] = min(cats), max(cats)
    path = write(tmp_path_factory.mktemp("r") / "d.csv", ["sender", "receiver", "outcome"], rows)
    net = ingest(DatasetBundle(path))
    assert list(net.category_labels) == sorted(set(r[2] for r in rows))
    for i, j, v in rows:
        assert net.category_labels[net.outcomes[i, j]] == v


def test_round_trip_is_exact(tmp_path):
    net = draw_network(DgpConfig(14, Homogeneous((0.0, 0.5, 1.5)), 1.0, "loglog", 4), 2)
    bundle = export_network(net, tmp_path / "dyads.csv", tmp_path / "nodes.csv")
    back = ingest(bundle)
    assert np.array_equal(back.outcomes, net.outcomes)
    assert np.array_equal(back.covariates[back.observed], net.covariates[net.observed])
    for spec in (EstimatorSpec.ptle(), EstimatorSpec.etle(), EstimatorSpec.additive()):
        assert np.array_equal(estimate(back, spec).fit.theta_hat, estimate(net, spec).fit.theta_hat)


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr().out


def test_cli_estimate_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, text = run(["estimate", "--data", str(DATA / "wave5.csv"), *FLAGS, "--out", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == cli.SCHEMA and doc["status"] == "ok" and doc["estimator"] == "ptle"
    assert [c["name"] for c in doc["coefficients"]] == ["gender", "smokers", "program"]
    assert set(doc["coefficients"][0]) >= {"name", "beta", "se_robust", "se_naive", "z", "p", "ci90", "ci95"}
    assert list(doc["counts"]["per_cutoff"]) == ["2", "3", "4", "5"]
    assert sum(doc["counts"]["per_cutoff"].values()) == doc["counts"]["total"]
    assert doc["counts"]["q_total"] == 32 * 31 // 2 * (30 * 29 // 2)
    assert doc["convergence"]["converged"]
    assert "gender" in text and "smokers" in text


def test_cli_raw_cutoffs(capsys):
    code, text = run(["estimate", "--data", str(DATA / "wave5.csv"), *FLAGS, "--estimator", "binary:3"], capsys)
    doc = json.loads(text)
    assert code == 0 and doc["estimator"] == "binary:3"
    assert list(doc["counts"]["per_cutoff"]) == ["3"]
    code, text = run(["estimate", "--data", str(DATA / "wave5.csv"), *FLAGS, "--cutoffs", "3,4"], capsys)
    assert list(json.loads(text)["counts"]["per_cutoff"]) == ["3", "4"]
    code, text = run(["estimate", "--data", str(DATA / "wave5.csv"), *FLAGS, "--estimator", "binary:1"], capsys)
    doc = json.loads(text)
    assert code == cli.EXIT_CODES["ingestion"] and doc["error"]["category"] == "ingestion"


def test_cli_other_estimators(capsys):
    for est, extra in (("etle", []), ("senderhet", ["--cutoffs", "3;3", "3;4", "4;3", "4;4"]),
                       ("additive", ["--cutoffs", "2,2,2,2", "2,3,2,2", "3,2,2,2", "2,2,3,2", "2,2,2,3", "3,3,3,3"])):
        code, text = run(["estimate", "--data", str(DATA / "wave6.csv"), *FLAGS, "--estimator", est, *extra], capsys)
        doc = json.loads(text)
        assert code == 0, doc
        assert any("experimental" in w for w in doc["warnings"]) == (est == "etle")
    # raw labels; only the threshold of category 3 is loaded (lambda of cutoff 2 is pinned at 0)
    assert [c["name"] for c in doc["coefficients"]][3:] == ["lambda_3"]
    assert any("not identified" in w for w in doc["warnings"])


@pytest.mark.parametrize("argv,category", [
    (["--recipe", "s=both:program"], "ingestion"),
    (["--estimator", "probit"], "configuration"),
    (["--estimator", "binary:5"], "separation"),
])
def test_cli_errors_exit_nonzero(argv, category, capsys):
    code, text = run(["estimate", "--data", str(DATA / "wave1.csv"), *FLAGS, *argv], capsys)
    doc = json.loads(text)
    assert code != 0 and doc["status"] == "error" and doc["error"]["category"] == category
    assert code == cli.EXIT_CODES[category]


def test_cli_missing_data_flag(capsys):
    code, text = run(["estimate"], capsys)
    assert code != 0 and json.loads(text)["error"]["category"] == "configuration"


def test_cli_degrees(capsys):
    code, text = run(["degrees", "--data", str(DATA / "wave5.csv"), *FLAGS, "--cutoff", "3"], capsys)
    doc = json.loads(text)
    net = wave()
    from tetradlogit.network import binarize, degree_summary
    assert doc["degrees"]["3"]["mean"] == degree_summary(binarize(net, 2)).mean
    code, text = run(["degrees", "--n-nodes", "10", "--reps", "3", "--lambdas", "0,1"], capsys)
    assert set(json.loads(text)["degrees"]) == {"1", "2"}


def test_cli_waves(tmp_path, capsys):
    files = [str(DATA / f"wave{n}.csv") for n in (4, 5)]
    code, text = run(["waves", "--data", *files, *FLAGS, "--estimators", "ptle,binary:3",
                      "--csv", str(tmp_path / "w.csv")], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "w.csv")))
    assert len(rows) == 2 * 2 * 3
    assert {r["estimator"] for r in rows} == {"ptle", "binary:3"}


def test_cli_simulation_commands(tmp_path, capsys):
    common = ["--n-nodes", "10", "--lambdas", "0,1", "--seed", "3"]
    code, text = run(["simulate", *common, "--reps", "4", "--estimators", "ptle,etle",
                      "--records", str(tmp_path / "r.csv")], capsys)
    doc = json.loads(text)
    assert code == 0 and doc["n_replications"] == 4 and set(doc["stats"]) == {"ptle", "etle"}
    code, text = run(["coverage", *common, "--reps", "50"], capsys)
    doc = json.loads(text)
    assert code == 0 and set(doc["robust"]) == {"se_over_std", "coverage90", "coverage95"}
    code, text = run(["sweep", *common, "--reps", "3", "--grid", "0.5,1", "--csv", str(tmp_path / "s.csv")], capsys)
    assert code == 0 and len(json.loads(text)["rows"]) == 2
    code, text = run(["sweep", *common, "--reps", "3", "--grid", "4"], capsys)
    assert code == cli.EXIT_CODES["configuration"]
    code, text = run(["simulate", "--n-nodes", "3"], capsys)
    assert code == cli.EXIT_CODES["dgp-config"]


def test_cli_draw_round_trip(tmp_path, capsys):
    outdir = tmp_path / "draw"
    code, text = run(["draw", "--n-nodes", "12", "--lambdas", "0,1,2", "--sparsity", "loglog",
                      "--rep", "1", "--outdir", str(outdir)], capsys)
    doc = json.loads(text)
    assert code == 0
    flags = ["--data", doc["dyads"], "--nodes", doc["nodes"], "--categories",
             ",".join(map(str, doc["categories"])), *[a for r in doc["recipes"] for a in ("--recipe", r)]]
    code, text = run(["estimate", *flags], capsys)
    via_cli = json.loads(text)["coefficients"][0]["beta"]
    direct = estimate(draw_network(DgpConfig(12, Homogeneous((0.0, 1.0, 2.0)), 1.0, "loglog", 0), 1),
                      EstimatorSpec.ptle()).fit.theta_hat[0]
    assert via_cli == direct


def test_render_error_text():
    doc = cli.error_report(IngestionError("bad"), "estimate")
    assert cli.render(doc) == "error [ingestion]: bad"
