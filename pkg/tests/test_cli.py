import json

import numpy as np
import pytest

from eqrep.cli import main
from eqrep.features import FEATURE_NAMES


def run(*argv):
    return main([str(a) for a in argv])


class TestSynth:
    def test_single_pitch(self, tmp_path):
        assert run("synth", "--pitches", "A4", "--duration", "0.1", "--out", tmp_path) == 0
        assert (tmp_path / "A4.wav").exists()
        index = json.loads((tmp_path / "corpus_index.json").read_text())
        assert index["A4"]["fundamental_hz"] == 440.0

    def test_default_corpus_has_16(self, tmp_path):
        assert run("synth", "--duration", "0.05", "--out", tmp_path) == 0
        assert len(list(tmp_path.glob("*.wav"))) == 16

    def test_rerun_byte_identical(self, tmp_path):
        run("synth", "--pitches", "C4", "--duration", "0.1", "--out", tmp_path / "a")
        run("synth", "--pitches", "C4", "--duration", "0.1", "--out", tmp_path / "b")
        assert (tmp_path / "a/C4.wav").read_bytes() == (tmp_path / "b/C4.wav").read_bytes()

    def test_bad_pitch_is_runtime_error(self, tmp_path):
        assert run("synth", "--pitches", "Z9", "--out", tmp_path) == 2


class TestResponse:
    def test_flat_setting(self, tmp_path, capsys):
        assert run("response", "--gains", "0,0,0,0,0") == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "frequency_hz,gain_db"
        assert len(lines) == 201  # 200 points by default
        assert all(abs(float(line.split(",")[1])) < 1e-12 for line in lines[1:])

    def test_low_shelf_asymptote(self, capsys):
        assert run("response", "--gains", "12,0,0,0,0") == 0
        lines = capsys.readouterr().out.strip().split("\n")[1:]
        freq, gain = map(float, lines[0].split(","))  # 20 Hz, well below the shelf
        assert gain == pytest.approx(12.0, abs=0.5)

    def test_bad_gain_syntax(self):
        assert run("response", "--gains", "a,b,c") == 2

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as exc:
            run("response")  # --gains is required
        assert exc.value.code == 1


class TestExtract:
    def test_header_and_row(self, tmp_path, capsys):
        run("synth", "--pitches", "C3", "--duration", "0.2", "--out", tmp_path)
        capsys.readouterr()
        assert run("extract", tmp_path / "C3.wav") == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "path," + ",".join(FEATURE_NAMES)
        assert len(lines) == 2
        values = [float(v) for v in lines[1].split(",")[1:]]
        assert len(values) == 17

    def test_missing_file(self, tmp_path):
        assert run("extract", tmp_path / "nope.wav") == 2


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    corpus = root / "corpus"
    assert run("synth", "--pitches", "C2", "--duration", "0.3", "--out", corpus) == 0
    assert run("dataset", "--corpus", corpus, "--mode", "single", "--step", "2",
               "--csv", "--out", root) == 0
    return root


class TestPipeline:
    """synth -> dataset -> train -> predict -> eval on a miniature corpus."""

    def test_manifest_counts(self, workspace):
        doc = json.loads((workspace / "manifest.json").read_text())
        assert len(doc["samples"]) == 5 * 13  # 2 dB grid has 13 values
        assert (workspace / "manifest.csv").exists()

    def test_dataset_deterministic(self, workspace, tmp_path):
        assert run("dataset", "--corpus", workspace / "corpus", "--mode", "single",
                   "--step", "2", "--out", tmp_path) == 0
        assert (tmp_path / "manifest.json").read_bytes() == \
            (workspace / "manifest.json").read_bytes()

    def test_train_predict_eval(self, workspace):
        model_path = workspace / "linear.json"
        assert run("train", "--manifest", workspace / "manifest.json",
                   "--model", "linear", "--outfile", model_path) == 0
        doc = json.loads(model_path.read_text())
        assert doc["kind"] == "linear"
        assert "test_mse" in doc["metrics"]

        # an unprocessed note should predict near the flat setting
        flat_wav = workspace / "corpus" / "C2.wav"
        assert run("predict", "--model", model_path, flat_wav) == 0

        assert run("eval", "--model", model_path,
                   "--manifest", workspace / "manifest.json", "--out", workspace) == 0
        report = json.loads((workspace / "eval_report.json").read_text())
        assert report["n_samples"] == 65
        assert (workspace / "eval_scatter.csv").exists()

    def test_train_records_config(self, workspace):
        model_path = workspace / "mlp.json"
        assert run("train", "--manifest", workspace / "manifest.json", "--model", "mlp",
                   "--epochs", "5", "--hidden-dim", "8", "--outfile", model_path) == 0
        doc = json.loads(model_path.read_text())
        assert doc["train_config"]["hidden_dim"] == 8
        assert doc["params"]["hidden_dim"] == 8

    def test_predict_sample_rate_mismatch(self, workspace, tmp_path):
        other = tmp_path / "sr"
        run("synth", "--pitches", "C2", "--duration", "0.3",
            "--sample-rate", "22050", "--out", other)
        assert run("predict", "--model", workspace / "linear.json",
                   other / "C2.wav") == 2

    def test_predict_missing_file(self, workspace):
        assert run("predict", "--model", workspace / "linear.json", "missing.wav") == 2


class TestEnvOverride:
    def test_eqrep_out(self, tmp_path, monkeypatch):
        monkeypatch.setenv("EQREP_OUT", str(tmp_path / "env_out"))
        assert run("synth", "--pitches", "A4", "--duration", "0.05", "--out", ".") == 0
        assert (tmp_path / "env_out" / "A4.wav").exists()


class TestHelp:
    @pytest.mark.parametrize("cmd", ["synth", "dataset", "extract", "train",
                                     "predict", "eval", "reproduce", "response"])
    def test_every_subcommand_has_help(self, cmd, capsys):
        with pytest.raises(SystemExit) as exc:
            run(cmd, "--help")
        assert exc.value.code == 0
        assert "usage" in capsys.readouterr().out
