"""Command-line interface behavior and reproducibility."""

import json

import pytest

from cscode.cli import main


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCapacity:
    def test_rds_five(self, capsys):
        code, out, _ = run_cli(capsys, ["capacity", "--rds", "5"])
        assert code == 0
        assert abs(float(out.strip()) - 0.7925) < 5e-5

    def test_rds_two_is_zero(self, capsys):
        code, out, _ = run_cli(capsys, ["capacity", "--rds", "2"])
        assert code == 0
        assert abs(float(out.strip())) < 1e-9

    def test_invalid_rds_fails_cleanly(self, capsys):
        code, _, err = run_cli(capsys, ["capacity", "--rds", "1"])
        assert code == 1
        assert "error" in err


class TestRateTable:
    def test_twenty_rows(self, capsys):
        code, out, _ = run_cli(capsys, ["rate-table", "--rds", "5", "--max-k", "20"])
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 21
        assert lines[19].split() == ["19", "24", "0.7917", "99.89%"]


class TestCountSequences:
    def test_center_start(self, capsys):
        code, out, _ = run_cli(
            capsys, ["count-sequences", "--rds", "5", "--length", "2"]
        )
        assert code == 0 and out.strip() == "4"

    def test_explicit_start(self, capsys):
        code, out, _ = run_cli(
            capsys, ["count-sequences", "--rds", "5", "--length", "1", "--start", "0"]
        )
        assert code == 0 and out.strip() == "1"


class TestParamCount:
    @pytest.mark.parametrize("arch,frames,expected", [
        ("mlp:32,16,8", 1, "924"),
        ("cnn:8,12,8", 1, "760"),
        ("cnn:16,32,12", 5, "9536"),
        ("mlp:256,128,64", 5, "50388"),
    ])
    def test_values(self, capsys, arch, frames, expected):
        code, out, _ = run_cli(
            capsys, ["param-count", "--arch", arch, "--frames", str(frames)]
        )
        assert code == 0 and out.strip() == expected

    def test_bad_arch_string(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["param-count", "--arch", "mlp:1,2"])
        assert exc.value.code == 2


class TestShuffleCodebook:
    def test_writes_codebook_and_manifest(self, capsys, tmp_path):
        out_path = tmp_path / "cb.json"
        code, out, _ = run_cli(capsys, [
            "shuffle-codebook", "--frames", "2", "--seed", "11", "--out", str(out_path),
        ])
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert len(doc["mappings"]) == 256
        manifest = json.loads((tmp_path / "cb.json.manifest.json").read_text())
        assert manifest["subcommand"] == "shuffle-codebook"
        assert manifest["master_seed"] == 11
        assert manifest["arguments"]["frames"] == 2

    def test_byte_identical_across_runs(self, capsys, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            run_cli(capsys, ["shuffle-codebook", "--frames", "2", "--seed", "3",
                             "--out", str(p)])
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestGradcheck:
    def test_small_mlp_passes(self, capsys):
        code, out, _ = run_cli(capsys, [
            "gradcheck", "--arch", "mlp:8,8,8", "--pairs", "3", "--all-coords",
        ])
        assert code == 0
        assert "PASS" in out


@pytest.fixture(scope="module")
def model_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "mlp.json"
    code = main([
        "train", "--arch", "mlp:16,12,8", "--frames", "1", "--snr", "5",
        "--epochs", "400", "--seed", "1", "--convergence-window", "0",
        "--out", str(path),
    ])
    assert code == 0
    return path


class TestTrainEvalSweep:
    def test_train_writes_checkpoint_and_manifest(self, model_path):
        doc = json.loads(model_path.read_text())
        assert doc["spec"]["hidden"] == [16, 12, 8]
        assert doc["meta"]["train_snr_db"] == 5.0
        manifest = json.loads(
            model_path.with_name(model_path.name + ".manifest.json").read_text()
        )
        assert manifest["subcommand"] == "train"

    def test_eval_with_named_and_model_decoders(self, capsys, model_path):
        code, out, _ = run_cli(capsys, [
            "eval", "--decoders", f"lookup,ml,{model_path}", "--snr", "7",
            "--min-errors", "40", "--max-frames", "40000", "--seed", "2",
        ])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "decoder,snr_db,frames,bits,bit_errors,ber,stderr"
        assert len(lines) == 4
        assert lines[3].split(",")[0] == "mlp"

    def test_sweep_json_format(self, capsys, model_path):
        code, out, _ = run_cli(capsys, [
            "sweep", "--decoders", "lookup,ml", "--snr-start", "4", "--snr-stop", "6",
            "--snr-step", "2", "--min-errors", "30", "--max-frames", "30000",
            "--seed", "3", "--format", "json",
        ])
        assert code == 0
        rows = json.loads(out)
        assert len(rows) == 4
        assert {r["decoder_id"] for r in rows} == {"lookup", "ml"}

    def test_sweep_outfile_determinism(self, capsys, tmp_path):
        outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in outs:
            code, _, _ = run_cli(capsys, [
                "sweep", "--decoders", "lookup,ml", "--snr-start", "5",
                "--snr-stop", "7", "--min-errors", "30", "--max-frames", "30000",
                "--seed", "4", "--out", str(p),
            ])
            assert code == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()
        manifest = json.loads(
            outs[0].with_name(outs[0].name + ".manifest.json").read_text()
        )
        assert manifest["arguments"]["snr_start"] == 5.0

    def test_compare_reports_gap(self, capsys):
        code, out, _ = run_cli(capsys, [
            "compare", "--decoders", "ml,lookup", "--snr-start", "6", "--snr-stop", "12",
            "--min-errors", "100", "--max-frames", "500000", "--seed", "5",
            "--target-ber", "1e-2",
        ])
        assert code == 0
        gap_lines = [l for l in out.splitlines() if l.startswith("# gap_db")]
        assert len(gap_lines) == 1
        assert "decoder=lookup reference=ml" in gap_lines[0]

    def test_missing_model_file(self, capsys):
        code, _, err = run_cli(capsys, [
            "eval", "--decoders", "nosuch.json", "--snr", "5",
        ])
        assert code == 1
        assert "nosuch.json" in err


class TestUsage:
    def test_unknown_flag_exits_two_with_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["capacity", "--rds", "5", "--bogus"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_help_documents_snr_convention_default(self, capsys):
        for sub in ("sweep", "eval", "train", "compare"):
            with pytest.raises(SystemExit) as exc:
                main([sub, "--help"])
            assert exc.value.code == 0
            text = capsys.readouterr().out
            assert "--snr-convention" in text
            assert "ebn0" in text

    def test_every_subcommand_accepts_seed(self, capsys):
        for sub in ("capacity", "rate-table", "count-sequences", "shuffle-codebook",
                    "param-count", "gradcheck", "train", "eval", "sweep", "compare"):
            with pytest.raises(SystemExit):
                main([sub, "--help"])
            assert "--seed" in capsys.readouterr().out
