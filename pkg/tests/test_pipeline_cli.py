import json
import os

import numpy as np
import pytest

from lolfusion import cli, pipeline
from lolfusion.errors import ConfigError, ParseError
from lolfusion.pipeline import RunConfig
from lolfusion.synthesis import read_dataset_csv
from lolfusion.thermal import TransformerParams

FAST = """\
hours = 720
anfis_epochs = 5
mlp_epochs = 5
ga_generations = 10
rbf_centers = 8
"""


@pytest.fixture
def fast_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(FAST)
    return path


def run(*argv):
    return cli.main([str(a) for a in argv])


def listing(directory):
    return sorted(os.listdir(directory))


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.seed == 0 and cfg.hours == 8760 and cfg.train_fraction == 0.7

    def test_stage_seeds_distinct(self):
        cfg = RunConfig(seed=10)
        seeds = [cfg.stage_seed(s) for s in ("profile", "split", "rbf", "anfis", "mlp", "ga")]
        assert len(set(seeds)) == 6 and min(seeds) == 10

    def test_load(self, tmp_path):
        (tmp_path / "c.cfg").write_text("seed = 3\nload_base = 0.6\nkalman_q = auto\n# note\n")
        cfg = RunConfig.load(tmp_path / "c.cfg")
        assert cfg.seed == 3 and cfg.profile.load_base == 0.6 and cfg.kalman_q is None

    def test_unknown_key(self, tmp_path):
        (tmp_path / "c.cfg").write_text("sede = 3\n")
        with pytest.raises(ConfigError):
            RunConfig.load(tmp_path / "c.cfg")

    def test_duplicate_key(self, tmp_path):
        (tmp_path / "c.cfg").write_text("seed = 3\nseed = 4\n")
        with pytest.raises(ParseError):
            RunConfig.load(tmp_path / "c.cfg")

    def test_bad_value(self, tmp_path):
        (tmp_path / "c.cfg").write_text("hours = many\n")
        with pytest.raises(ValueError):
            RunConfig.load(tmp_path / "c.cfg")

    def test_hash_ignores_paths(self):
        assert RunConfig(output_dir="a").config_hash() == RunConfig(output_dir="b").config_hash()
        assert RunConfig(seed=1).config_hash() != RunConfig(seed=2).config_hash()


class TestParamsInit:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "p.cfg"
        assert run("params", "init", "--out", path) == 0
        assert TransformerParams.load(path) == TransformerParams()

    def test_refuses_overwrite(self, tmp_path):
        path = tmp_path / "p.cfg"
        path.write_text("keep me\n")
        assert run("params", "init", "--out", path) == 1
        assert path.read_text() == "keep me\n"
        assert run("params", "init", "--out", path, "--force") == 0
        assert TransformerParams.load(path) == TransformerParams()

    def test_edited_params_are_used(self, tmp_path):
        run("params", "init", "--out", tmp_path / "p.cfg")
        text = (tmp_path / "p.cfg").read_text().replace("180000.0", "360000.0")
        (tmp_path / "p.cfg").write_text(text)
        (tmp_path / "run.cfg").write_text("params_path = p.cfg\nhours = 48\n")
        cfg = RunConfig.load(tmp_path / "run.cfg")
        assert cfg.params.normal_insulation_life == 360000.0


class TestSynthesizeCommand:
    def test_outputs_and_determinism(self, tmp_path, fast_config):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run("synthesize", "--config", fast_config, "--out", a) == 0
        assert run("synthesize", "--config", fast_config, "--out", b) == 0
        assert listing(a) == ["dataset.csv", "manifest.json"]
        assert (a / "dataset.csv").read_bytes() == (b / "dataset.csv").read_bytes()
        manifest = json.loads((a / "manifest.json").read_text())
        assert manifest["seed"] == 0 and manifest["rows"] == 720

    def test_seed_changes_output(self, tmp_path, fast_config):
        run("synthesize", "--config", fast_config, "--out", tmp_path / "a")
        run("synthesize", "--config", fast_config, "--out", tmp_path / "b", "--seed", "5")
        assert (tmp_path / "a" / "dataset.csv").read_bytes() != (tmp_path / "b" / "dataset.csv").read_bytes()

    def test_rated_profile(self, tmp_path):
        rows = "\n".join(f"{h},1.0,30.0" for h in range(24))
        (tmp_path / "prof.csv").write_text("hour,load_pu,ambient_c\n" + rows + "\n")
        (tmp_path / "run.cfg").write_text("profile_csv = prof.csv\n")
        assert run("synthesize", "--config", tmp_path / "run.cfg", "--out", tmp_path / "o") == 0
        ds = read_dataset_csv(tmp_path / "o" / "dataset.csv")
        np.testing.assert_allclose(ds.targets, 100 / 180000, rtol=0, atol=1e-12)

    def test_refuses_existing_without_force(self, tmp_path, fast_config):
        out = tmp_path / "o"
        run("synthesize", "--config", fast_config, "--out", out)
        before = (out / "dataset.csv").read_bytes()
        assert run("synthesize", "--config", fast_config, "--out", out, "--seed", "9") == 1
        assert (out / "dataset.csv").read_bytes() == before
        assert listing(out) == ["dataset.csv", "manifest.json"]
        assert run("synthesize", "--config", fast_config, "--out", out, "--seed", "9", "--force") == 0
        assert (out / "dataset.csv").read_bytes() != before


class TestStagedCommands:
    def test_train_fuse_evaluate(self, tmp_path, fast_config):
        out = tmp_path / "o"
        common = ("--config", fast_config, "--out", out)
        assert run("synthesize", *common) == 0
        for method in ("anfis", "rbf", "mlp"):
            assert run("train", "--method", method, *common) == 0
        assert run("fuse", "--method", "owa", *common) == 0
        assert run("fuse", "--method", "kalman", *common) == 0
        assert run("evaluate", *common, "--force") == 0
        report = json.loads((out / "report.json").read_text())
        methods = {row["method"] for row in report["methods"]}
        assert methods == {"ANFIS", "RBF", "MLP", "OWA", "KALMAN"}
        header = (out / "comparison.csv").read_text().splitlines()[0]
        assert header == "hour,target,anfis,rbf,owa,kalman"
        fig5 = (out / "fig5.csv").read_text().splitlines()
        assert fig5[0] == "hour,actual,fused,error" and len(fig5) == 51
        model = json.loads((out / "model_anfis.json").read_text())
        assert model["manifest"]["config_hash"] == RunConfig.load(fast_config).config_hash()

    def test_staged_matches_run_all(self, tmp_path, fast_config):
        staged, whole = tmp_path / "s", tmp_path / "w"
        common = ("--config", fast_config, "--out", staged)
        run("synthesize", *common)
        for method in ("anfis", "rbf", "mlp"):
            run("train", "--method", method, *common)
        run("fuse", "--method", "owa", *common)
        run("fuse", "--method", "kalman", *common)
        run("evaluate", *common, "--force")
        assert run("run-all", "--config", fast_config, "--out", whole) == 0
        a = json.loads((staged / "report.json").read_text())["methods"]
        b = json.loads((whole / "report.json").read_text())["methods"]
        for x, y in zip(a, b):
            assert x["method"] == y["method"]
            assert x["mse"] == pytest.approx(y["mse"], rel=1e-9)

    def test_train_without_dataset(self, tmp_path):
        assert run("train", "--method", "rbf", "--out", tmp_path / "empty") == 1

    def test_fuse_without_models(self, tmp_path, fast_config):
        run("synthesize", "--config", fast_config, "--out", tmp_path)
        assert run("fuse", "--method", "owa", "--config", fast_config, "--out", tmp_path) == 1


class TestExitCodes:
    def test_unknown_method(self, capsys):
        with pytest.raises(SystemExit) as info:
            run("train", "--method", "svm")
        assert info.value.code == 1

    def test_missing_command(self):
        with pytest.raises(SystemExit) as info:
            run()
        assert info.value.code == 1

    def test_bad_config_is_data_error(self, tmp_path):
        (tmp_path / "c.cfg").write_text("hours = -5\n")
        assert run("synthesize", "--config", tmp_path / "c.cfg", "--out", tmp_path / "o") == 2
        assert not (tmp_path / "o" / "dataset.csv").exists()

    def test_malformed_profile_is_data_error(self, tmp_path, capsys):
        (tmp_path / "prof.csv").write_text("hour,load_pu,ambient_c\n0,1.0,30\n1,oops,30\n")
        (tmp_path / "c.cfg").write_text("profile_csv = prof.csv\n")
        assert run("synthesize", "--config", tmp_path / "c.cfg", "--out", tmp_path / "o") == 2
        assert "line 3" in capsys.readouterr().err

    def test_divergence_is_numeric_and_leaves_nothing(self, tmp_path, fast_config, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(FAST + "mlp_learning_rate = 1e6\n")
        out = tmp_path / "o"
        assert run("run-all", "--config", cfg, "--out", out) == 3
        assert "train MLP" in capsys.readouterr().err
        assert listing(out) == []


class TestReportHelpers:
    def test_dumps_json_stable(self):
        doc = {"b": 0.1, "a": [1.0, 2.5e-9]}
        assert pipeline.dumps_json(doc) == pipeline.dumps_json(json.loads(pipeline.dumps_json(doc)))
        assert pipeline.dumps_json(doc).index('"a"') < pipeline.dumps_json(doc).index('"b"')

    def test_manifest_fields(self):
        m = pipeline.manifest(RunConfig(), rows=3)
        assert {"seed", "config_hash", "params_hash", "rows"} <= set(m)
