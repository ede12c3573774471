import json
import math
import subprocess
import sys

import numpy as np
import pytest

from netchoice.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, derive_seed, main

INTERACTIONS = """actor_id,site_id,kind,timestamp,update_id
e,s1,guestbook,300,
f,s2,comment,400,ub1
a,s2,amp,,ub1
b,s1,guestbook,500,
a,s1,guestbook,600,
e,s3,guestbook,700,
f,s4,guestbook,800,
d,s2,guestbook,900,
e,s2,guestbook,950,
f,s1,guestbook,980,
b,s3,guestbook,1000,
a,s4,guestbook,1100,
e,s4,guestbook,1200,
d,s1,guestbook,1300,
"""

UPDATES = """author_id,site_id,update_id,timestamp,role_label
a,s1,ua1,100,CG
a,s1,ua2,200,CG
b,s2,ub1,150,P
c,s3,uc1,120,CG
c,s3,uc2,180,P
d,s4,ud1,50,CG
"""

GEO = "author_id,timestamp,state\n" + "".join(
    f"a,{i},MN\n" for i in range(12)
) + "".join(f"b,{i},MN\n" for i in range(12)) + "".join(f"c,{i},CA\n" for i in range(12))

SITES = """site_id,health_condition,created
s1,Cancer,10
s2,Cancer,20
s3,Injury,30
s4,,40
"""


@pytest.fixture
def world(tmp_path):
    paths = {}
    for name, text in [
        ("interactions.csv", INTERACTIONS),
        ("updates.csv", UPDATES),
        ("geo.csv", GEO),
        ("sites.csv", SITES),
    ]:
        p = tmp_path / name
        p.write_text(text)
        paths[name.split(".")[0]] = str(p)
    paths["out"] = str(tmp_path / "out")
    return paths


def run(argv):
    return main(argv)


def base_args(world, *extra):
    return [
        "--interactions", world["interactions"],
        "--updates", world["updates"],
        "--out-dir", world["out"],
        *extra,
    ]


class TestPipelineCommands:
    def test_ingest(self, world, tmp_path, capsys):
        assert run(["ingest", *base_args(world)]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "throughput" in printed
        summary = json.loads((tmp_path / "out" / "ingest_summary.json").read_text())
        assert summary["interaction_events"] == 14
        assert summary["update_events"] == 6
        assert "config_hash" in summary

    def test_project(self, world, tmp_path):
        assert run(["project", *base_args(world)]) == EXIT_OK
        lines = (tmp_path / "out" / "projected.csv").read_text().splitlines()
        assert lines[0].startswith("# config_hash=")
        assert lines[1] == "source_author,target_author,timestamp,kind,via_site"
        summary = json.loads((tmp_path / "out" / "project_summary.json").read_text())
        assert summary["self_interactions_removed"] == 1  # a's guestbook on own site s1
        assert summary["directed_interactions"] == len(lines) - 2

    def test_network(self, world, tmp_path):
        assert run(["network", *base_args(world)]) == EXIT_OK
        edges = (tmp_path / "out" / "edges.csv").read_text().splitlines()
        assert edges[1] == "source,target,first_time,interaction_count"
        share = (tmp_path / "out" / "wcc_share.csv").read_text().splitlines()
        assert share[1] == "time,activated,largest_size,share"
        summary = json.loads((tmp_path / "out" / "network_summary.json").read_text())
        assert summary["edges"] >= 5
        assert 0 < summary["largest_wcc_share"] <= 1

    def test_initiations_and_report(self, world, tmp_path, capsys):
        assert run(["initiations", *base_args(world)]) == EXIT_OK
        init_csv = tmp_path / "out" / "initiations.csv"
        assert init_csv.exists()
        assert run(["authors", "--updates", world["updates"], "--geo-posts", world["geo"],
                    "--site-conditions", world["sites"], "--out-dir", world["out"]]) == EXIT_OK
        authors_csv = tmp_path / "out" / "authors.csv"
        text = authors_csv.read_text()
        assert "a,Mixed" not in text  # a is pure CG
        assert run(["report", "--initiations", str(init_csv), "--authors", str(authors_csv),
                    "--out-dir", world["out"]]) == EXIT_OK
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["n_initiations"] > 0
        assert abs(sum(report["type_shares"].values()) - 1.0) < 1e-12
        assert "same_state_share" in report

    def test_report_empty_initiations(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("initiator,receiver,time,itype,is_reciprocal,initiator_was_isolate\n")
        out = tmp_path / "out"
        assert run(["report", "--initiations", str(empty), "--out-dir", str(out)]) == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["n_initiations"] == 0

    def test_features_and_sample(self, world, tmp_path):
        assert run(["features", *base_args(world), "--site-conditions", world["sites"]]) == EXIT_OK
        lines = (tmp_path / "out" / "features.csv").read_text().splitlines()
        assert lines[1].startswith("initiator,receiver,time,censored_log_target_outdegree")
        assert run(["sample", *base_args(world), "--negatives", "2", "--seed", "9"]) == EXIT_OK
        jsonl = (tmp_path / "out" / "choices.jsonl").read_text().splitlines()
        meta = json.loads(jsonl[0])["meta"]
        assert meta["n_negatives"] == 2
        first = json.loads(jsonl[1])
        assert set(first) == {"chooser", "time", "alternatives", "chosen", "X", "feature_names"}
        summary = json.loads((tmp_path / "out" / "sample_summary.json").read_text())
        assert summary["instances"] == len(jsonl) - 1


class TestFitCommands:
    def test_fit_mnl_closed_form(self, tmp_path):
        # Three of four identical binary choice sets pick the x=1 alternative.
        path = tmp_path / "choices.jsonl"
        rows = []
        for i, chosen in enumerate([0, 0, 0, 1]):
            rows.append(json.dumps({
                "chooser": "c", "time": i, "alternatives": ["p", "q"], "chosen": chosen,
                "X": [[1.0], [0.0]], "feature_names": ["x"],
            }))
        path.write_text("\n".join(rows) + "\n")
        out = tmp_path / "out"
        code = run(["fit-mnl", "--choices", str(path), "--out-dir", str(out),
                    "--train-frac", "0.9", "--config", str(_window_config(tmp_path, 0, 100))])
        assert code == EXIT_OK
        model = json.loads((out / "model_mnl.json").read_text())
        assert model["coefficients"][0] == pytest.approx(math.log(3.0), abs=1e-6)
        assert model["n_train"] == 4
        assert (out / "model_mnl.txt").exists()

    def test_fit_logit(self, tmp_path):
        rng = np.random.default_rng(0)
        n = 2000
        x = rng.normal(size=n)
        z = rng.integers(0, 2, size=n).astype(float)
        eta = 0.4 - 0.9 * x + 0.6 * x * z
        y = (rng.uniform(size=n) < 1 / (1 + np.exp(-eta))).astype(int)
        data = tmp_path / "data.csv"
        with open(data, "w") as fh:
            fh.write("y,x,z\n")
            for row in zip(y, x, z):
                fh.write(f"{row[0]},{row[1]},{row[2]}\n")
        out = tmp_path / "out"
        assert run(["fit-logit", "--data", str(data), "--outcome", "y",
                    "--features", "x,z,x:z", "--out-dir", str(out)]) == EXIT_OK
        model = json.loads((out / "model_logit.json").read_text())
        assert model["feature_names"] == ["(intercept)", "x", "z", "x:z"]
        assert model["converged"]

    def test_fit_ols_with_anova(self, tmp_path):
        rng = np.random.default_rng(1)
        n = 300
        x = rng.normal(size=n)
        noise = rng.normal(size=n)
        y = 2.0 + 1.5 * x + rng.normal(size=n)
        data = tmp_path / "data.csv"
        with open(data, "w") as fh:
            fh.write("y,x,noise\n")
            for row in zip(y, x, noise):
                fh.write(f"{row[0]},{row[1]},{row[2]}\n")
        out = tmp_path / "out"
        assert run(["fit-ols", "--data", str(data), "--outcome", "y",
                    "--features", "x,noise", "--drop", "noise", "--out-dir", str(out)]) == EXIT_OK
        model = json.loads((out / "model_ols.json").read_text())
        assert model["anova"]["df"][0] == 1
        assert model["anova"]["p_value"] > 0.001  # noise column: typically insignificant
        assert model["r_squared"] > 0.5

    def test_fit_ols_collinear_exits_2(self, tmp_path):
        data = tmp_path / "data.csv"
        with open(data, "w") as fh:
            fh.write("y,x,x2\n")
            for i in range(30):
                fh.write(f"{i * 1.0},{i * 1.0},{i * 2.0}\n")
        assert run(["fit-ols", "--data", str(data), "--outcome", "y",
                    "--features", "x,x2", "--out-dir", str(tmp_path / "out")]) == EXIT_NUMERICAL


class TestUtilityCommands:
    def test_bbse(self, tmp_path):
        holdout = tmp_path / "holdout.csv"
        rows = ["prediction,label"]
        rows += ["CG,CG"] * 40 + ["P,CG"] * 10 + ["P,P"] * 40 + ["CG,P"] * 10
        holdout.write_text("\n".join(rows) + "\n")
        marginal = tmp_path / "marginal.json"
        marginal.write_text(json.dumps([0.35, 0.65]))
        out = tmp_path / "out"
        assert run(["bbse", "--holdout", str(holdout), "--target-marginal", str(marginal),
                    "--out-dir", str(out)]) == EXIT_OK
        payload = json.loads((out / "bbse.json").read_text())
        assert payload["corrected_priors"] == pytest.approx([0.25, 0.75], abs=1e-12)

    def test_kappa(self, tmp_path):
        labels = tmp_path / "labels.csv"
        rows = ["rater_a,rater_b"]
        rows += ["0,0"] * 20 + ["0,1"] * 5 + ["1,0"] * 10 + ["1,1"] * 15
        labels.write_text("\n".join(rows) + "\n")
        out = tmp_path / "out"
        assert run(["kappa", "--labels", str(labels), "--out-dir", str(out)]) == EXIT_OK
        payload = json.loads((out / "kappa.json").read_text())
        assert payload["kappa"] == pytest.approx(0.4, abs=1e-12)

    def test_synth_then_fit(self, tmp_path):
        out = tmp_path / "out"
        assert run(["synth", "--n-authors", "60", "--n-choices", "300", "--pool", "10",
                    "--beta", "1.5,-0.75", "--seed", "3", "--out-dir", str(out)]) == EXIT_OK
        jsonl = out / "synth_choices.jsonl"
        assert jsonl.exists()
        truth = json.loads((out / "synth_truth.json").read_text())
        assert truth["beta_true"] == [1.5, -0.75]
        assert run(["fit-mnl", "--choices", str(jsonl), "--train-frac", "0.8",
                    "--out-dir", str(out)]) == EXIT_OK
        model = json.loads((out / "model_mnl.json").read_text())
        assert model["test_accuracy"] > 1 / 10


class TestExitCodes:
    def test_unknown_flag_is_64(self, world):
        assert run(["ingest", "--bogus", *base_args(world)]) == EXIT_USAGE

    def test_missing_file_is_1(self, tmp_path):
        assert run(["ingest", "--interactions", "/nope.csv", "--updates", "/nope2.csv",
                    "--out-dir", str(tmp_path)]) == EXIT_VALIDATION

    def test_schema_error_is_1(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("actor_id,site_id,kind,timestamp,update_id\na,s,visit,1,\n")
        upd = tmp_path / "upd.csv"
        upd.write_text("author_id,site_id,update_id,timestamp,role_label\na,s,u1,1,CG\n")
        assert run(["ingest", "--interactions", str(bad), "--updates", str(upd),
                    "--out-dir", str(tmp_path / "out")]) == EXIT_VALIDATION

    def test_bad_config_key_is_1(self, world, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("not_a_key=1\n")
        assert run(["ingest", "--config", str(cfg), *base_args(world)]) == EXIT_VALIDATION

    def test_console_script_usage_exit(self):
        proc = subprocess.run(
            [sys.executable, "-m", "netchoice.cli", "ingest", "--definitely-not-a-flag"],
            capture_output=True,
        )
        assert proc.returncode == EXIT_USAGE


class TestConfigAndDeterminism:
    def test_config_file_with_flag_override(self, world, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"interactions={world['interactions']}\n"
            f"updates={world['updates']}\n"
            "negatives=3\n"
            "seed=5\n"
        )
        out = tmp_path / "o1"
        assert run(["sample", "--config", str(cfg), "--out-dir", str(out), "--negatives", "2"]) == EXIT_OK
        meta = json.loads((out / "choices.jsonl").read_text().splitlines()[0])["meta"]
        assert meta["n_negatives"] == 2  # flag beats config file

    def test_same_seed_byte_identical_across_runs_and_threads(self, world, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        args = ["--interactions", world["interactions"], "--updates", world["updates"],
                "--seed", "7", "--negatives", "3"]
        assert run(["sample", *args, "--out-dir", str(out1), "--threads", "1"]) == EXIT_OK
        assert run(["sample", *args, "--out-dir", str(out2), "--threads", "4"]) == EXIT_OK
        assert (out1 / "choices.jsonl").read_bytes() == (out2 / "choices.jsonl").read_bytes()
        assert (out1 / "sample_summary.json").read_bytes() == (out2 / "sample_summary.json").read_bytes()

    def test_different_seed_changes_sample(self, world, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        base = ["--interactions", world["interactions"], "--updates", world["updates"], "--negatives", "2"]
        assert run(["sample", *base, "--seed", "1", "--out-dir", str(out1)]) == EXIT_OK
        assert run(["sample", *base, "--seed", "2", "--out-dir", str(out2)]) == EXIT_OK
        assert (out1 / "choices.jsonl").read_bytes() != (out2 / "choices.jsonl").read_bytes()

    def test_env_threads_fallback(self, world, tmp_path, monkeypatch):
        monkeypatch.setenv("NETCHOICE_THREADS", "2")
        out = tmp_path / "out"
        assert run(["ingest", *base_args(world)]) == EXIT_OK
        monkeypatch.setenv("NETCHOICE_THREADS", "banana")
        assert run(["ingest", *base_args(world)]) == EXIT_VALIDATION

    def test_seed_derivation_is_stable(self):
        assert derive_seed(0, "sample") == derive_seed(0, "sample")
        assert derive_seed(0, "sample") != derive_seed(0, "synth")
        assert derive_seed(1, "sample") != derive_seed(0, "sample")


def _window_config(tmp_path, start, end):
    cfg = tmp_path / "window.cfg"
    cfg.write_text(f"window_start={start}\nwindow_end={end}\n")
    return cfg
