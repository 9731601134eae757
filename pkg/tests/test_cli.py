import json
import subprocess
import sys

import numpy as np
import pytest

import absgen.datasets as D
import absgen.models as M
from absgen import cli

# small but non-trivial: 12px varied digits, 3 epochs, 2 eval runs
BASE_CONFIG = {
    "experiment": "t49",
    "dataset": {
        "synthetic": {
            "digits": [4, 9],
            "n_per_class": 40,
            "probe_n_per_class": 30,
            "size": 12,
            "style": "varied",
        }
    },
    "train": {"epochs": 3, "pairs_per_epoch": 256, "batch_size": 32,
              "swap_augment": True},
    "eval": {"corruptions": ["raw", "flipped"], "runs": 2, "n_pairs": 200},
}


def write_config(tmp_path, overrides=None, name="cfg.json"):
    cfg = json.loads(json.dumps(BASE_CONFIG))
    for path, value in (overrides or {}).items():
        node = cfg
        parts = path.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    target = tmp_path / name
    target.write_text(json.dumps(cfg))
    return target


def run(argv):
    return cli.main([str(a) for a in argv])


def trained(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert run(["train", "--config", cfg, "--out-dir", out]) == 0
    return cfg, out


# -- config loading --------------------------------------------------------


def test_defaults_fill_unset_fields(tmp_path):
    cfg = cli.load_config(write_config(tmp_path))
    assert cfg["train"]["batch_size"] == 32
    assert cfg["eval"]["threshold"] == 0.5
    assert cfg["oneshot"]["n_way"] == 5
    assert cfg["model"]["output"] == "signed_distance"


def test_cnn_defaults_to_probability_output(tmp_path):
    cfg = cli.load_config(write_config(tmp_path, {"model.kind": "cnn"}))
    assert cfg["model"]["output"] == "probability"


def test_unknown_field_names_its_path(tmp_path):
    path = write_config(tmp_path, {"train.epochz": 3})
    with pytest.raises(cli.ConfigError, match="train.epochz"):
        cli.load_config(path)


def test_bad_type_names_its_path(tmp_path):
    path = write_config(tmp_path, {"train.epochs": "ten"})
    with pytest.raises(cli.ConfigError, match="train.epochs"):
        cli.load_config(path)


def test_bool_does_not_pass_as_int(tmp_path):
    path = write_config(tmp_path, {"train.epochs": True})
    with pytest.raises(cli.ConfigError, match="train.epochs"):
        cli.load_config(path)


def test_swap_augment_rejected_for_siamese(tmp_path):
    path = write_config(tmp_path, {"model.arch": "siamese"})
    with pytest.raises(cli.ConfigError, match="swap_augment"):
        cli.load_config(path)


def test_unknown_corruption_rejected(tmp_path):
    path = write_config(tmp_path, {"eval.corruptions": ["raw", "sepia"]})
    with pytest.raises(cli.ConfigError, match=r"corruptions\[1\]"):
        cli.load_config(path)


def test_parameterized_corruption_names_accepted(tmp_path):
    path = write_config(tmp_path, {"eval.corruptions": ["salt_pepper_0.35", "gaussian_2.0"]})
    cfg = cli.load_config(path)
    assert cfg["eval"]["corruptions"] == ["salt_pepper_0.35", "gaussian_2.0"]


def test_seed_override_touches_every_section(tmp_path):
    cfg = cli.load_config(write_config(tmp_path), seed_override=7)
    assert cfg["train"]["seed"] == 7
    assert cfg["eval"]["seed"] == 7
    assert cfg["oneshot"]["seed"] == 7
    assert cfg["theory"]["seed"] == 7
    assert cfg["dataset"]["synthetic"]["seed"] == 7
    assert cfg["dataset"]["synthetic"]["probe_seed"] == 8


def test_fingerprint_is_stable_and_sensitive(tmp_path):
    a = cli.load_config(write_config(tmp_path))
    b = cli.load_config(write_config(tmp_path))
    c = cli.load_config(write_config(tmp_path, {"train.seed": 1}))
    assert cli.config_fingerprint(a) == cli.config_fingerprint(b)
    assert cli.config_fingerprint(a) != cli.config_fingerprint(c)


# -- train -----------------------------------------------------------------


def test_train_writes_params_loss_and_config(tmp_path):
    _, out = trained(tmp_path)
    assert (out / "params.bin").exists()
    lines = (out / "loss.csv").read_text().strip().splitlines()
    assert lines[0] == "epoch,mean_loss"
    assert len(lines) == 1 + 3
    losses = [float(line.split(",")[1]) for line in lines[1:]]
    assert losses[-1] < losses[0]
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["config"]["experiment"] == "t49"
    assert len(echoed["config_fingerprint"]) == 64


def test_train_zero_epochs_keeps_initialization(tmp_path):
    cfg = write_config(tmp_path, {"train.epochs": 0})
    out = tmp_path / "out"
    assert run(["train", "--config", cfg, "--out-dir", out]) == 0
    assert (out / "loss.csv").read_text() == "epoch,mean_loss\n"
    params = M.load_params(out / "params.bin")
    spec = M.build_mlp(2 * 12 * 12)
    fresh = M.init_params(spec, seed=0)
    for name in fresh.tensors:
        np.testing.assert_array_equal(params.tensors[name].data, fresh.tensors[name].data)


def test_train_missing_config_file_exits_2(tmp_path, capsys):
    assert run(["train", "--config", tmp_path / "nope.json"]) == 2
    assert "missing input" in capsys.readouterr().err


def test_train_invalid_json_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["train", "--config", bad]) == 3
    assert "invalid config" in capsys.readouterr().err


def test_train_unknown_field_exits_3(tmp_path, capsys):
    bad = write_config(tmp_path, {"trian": {}})
    assert run(["train", "--config", bad]) == 3
    assert "trian" in capsys.readouterr().err


def test_train_missing_manifest_exits_2(tmp_path):
    cfg = write_config(tmp_path, {"dataset.kind": "manifest",
                                  "dataset.manifest": "nope.json"})
    assert run(["train", "--config", cfg]) == 2


def test_train_requires_config_flag(capsys):
    assert run(["train"]) == 3
    assert "--config" in capsys.readouterr().err


# -- eval ------------------------------------------------------------------


def test_eval_writes_reports_and_csv(tmp_path):
    cfg, out = trained(tmp_path)
    assert run(["eval", "--config", cfg, "--params", out / "params.bin",
                "--out-dir", out]) == 0
    payload = json.loads((out / "eval.json").read_text())
    assert sorted(payload["reports"]) == ["flipped", "raw"]
    assert payload["reports"]["raw"]["auc"]["runs"] == 2
    rows = (out / "results.csv").read_text().strip().splitlines()
    assert rows[0] == "experiment,corruption,metric,mean,std,runs"
    assert len(rows) == 1 + 2 * 2
    assert rows[1].startswith("t49,raw,auc,")


def test_eval_csv_appends_without_second_header(tmp_path):
    cfg, out = trained(tmp_path)
    for _ in range(2):
        assert run(["eval", "--config", cfg, "--params", out / "params.bin",
                    "--out-dir", out]) == 0
    rows = (out / "results.csv").read_text().strip().splitlines()
    assert rows.count("experiment,corruption,metric,mean,std,runs") == 1
    assert len(rows) == 1 + 2 * 2 * 2


def test_eval_corruption_flag_overrides_config(tmp_path):
    cfg, out = trained(tmp_path)
    assert run(["eval", "--config", cfg, "--params", out / "params.bin",
                "--out-dir", out, "--corruptions", "raw"]) == 0
    payload = json.loads((out / "eval.json").read_text())
    assert sorted(payload["reports"]) == ["raw"]


def test_eval_oracle_is_perfect_on_raw_and_flipped(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert run(["eval", "--config", cfg, "--oracle", "--out-dir", out]) == 0
    payload = json.loads((out / "eval.json").read_text())
    for corr in ("raw", "flipped"):
        assert payload["reports"][corr]["auc"]["mean"] == 1.0
        assert payload["reports"][corr]["f1"]["mean"] == 1.0


def test_eval_without_params_or_oracle_exits_3(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert run(["eval", "--config", cfg]) == 3
    assert "--params" in capsys.readouterr().err


def test_eval_params_spec_mismatch_exits_4(tmp_path, capsys):
    cfg, out = trained(tmp_path)
    big = write_config(tmp_path, {"dataset.synthetic.size": 28}, name="big.json")
    assert run(["eval", "--config", big, "--params", out / "params.bin",
                "--out-dir", out]) == 4
    assert "params mismatch" in capsys.readouterr().err


def test_eval_missing_params_file_exits_2(tmp_path):
    cfg = write_config(tmp_path)
    assert run(["eval", "--config", cfg, "--params", tmp_path / "nope.bin"]) == 2


def test_cnn_on_too_small_images_exits_3(tmp_path, capsys):
    cfg, out = trained(tmp_path)
    cnn = write_config(tmp_path, {"model.kind": "cnn"}, name="cnn.json")
    assert run(["eval", "--config", cnn, "--params", out / "params.bin",
                "--out-dir", out]) == 3
    assert "invalid config" in capsys.readouterr().err


# -- oneshot ---------------------------------------------------------------


def test_oneshot_oracle_is_perfect(tmp_path):
    cfg = write_config(tmp_path, {"oneshot.trials": 50})
    out = tmp_path / "out"
    assert run(["oneshot", "--config", cfg, "--oracle", "--n-way", 2,
                "--out-dir", out]) == 0
    payload = json.loads((out / "oneshot.json").read_text())
    assert payload["n_way"] == 2
    assert payload["accuracy"]["mean"] == 1.0


def test_oneshot_trained_model_runs(tmp_path):
    cfg, out = trained(tmp_path)
    small = write_config(tmp_path, {"oneshot.trials": 20, "oneshot.n_way": 2},
                         name="osh.json")
    assert run(["oneshot", "--config", small, "--params", out / "params.bin",
                "--out-dir", out]) == 0
    payload = json.loads((out / "oneshot.json").read_text())
    assert 0.0 <= payload["accuracy"]["mean"] <= 1.0
    rows = (out / "results.csv").read_text().strip().splitlines()
    assert rows[-1].startswith("t49,raw,accuracy,")


def test_oneshot_n_way_beyond_classes_exits_5(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert run(["oneshot", "--config", cfg, "--oracle", "--n-way", 7]) == 5
    assert "n_way" in capsys.readouterr().err


# -- theory ----------------------------------------------------------------


def test_theory_defaults_satisfy_definition(tmp_path, capsys):
    assert run(["theory", "--out-dir", tmp_path]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert sorted(payload) == ["acc_on_A", "acc_on_B", "def3_satisfied",
                               "normal_angle_deg"]
    assert payload["def3_satisfied"] is True
    assert payload["acc_on_A"] >= 0.95
    assert payload["acc_on_B"] >= 0.95
    assert payload["normal_angle_deg"] < 15.0
    assert json.loads((tmp_path / "theory.json").read_text()) == payload


def test_theory_swapped_means_break_definition(tmp_path, capsys):
    cfg = tmp_path / "swap.json"
    cfg.write_text(json.dumps({"theory": {"swap_b_means": True,
                                          "n_train": 500, "n_test": 500}}))
    assert run(["theory", "--config", cfg, "--out-dir", tmp_path]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["def3_satisfied"] is False
    assert payload["acc_on_B"] < 0.7


def test_theory_invalid_sigma_exits_3(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"theory": {"sigma1": 0}}))
    assert run(["theory", "--config", cfg, "--out-dir", tmp_path]) == 3


# -- corrupt-preview -------------------------------------------------------


def test_preview_writes_before_after_pairs(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert run(["corrupt-preview", "--config", cfg, "--out-dir", out,
                "--corruptions", "raw", "gaussian_0.9", "--count", 2]) == 0
    for corr in ("raw", "gaussian_0.9"):
        for i in range(2):
            assert (out / "preview" / corr / f"sample{i:02d}_before.pgm").exists()
            assert (out / "preview" / corr / f"sample{i:02d}_after.pgm").exists()
    # raw leaves the image untouched, so before and after match exactly
    before = D.load_pgm(out / "preview" / "raw" / "sample00_before.pgm")
    after = D.load_pgm(out / "preview" / "raw" / "sample00_after.pgm")
    np.testing.assert_array_equal(before, after)


def test_preview_rejects_bad_count(tmp_path):
    cfg = write_config(tmp_path)
    assert run(["corrupt-preview", "--config", cfg, "--out-dir", tmp_path,
                "--count", 0]) == 3


# -- validate-manifest -----------------------------------------------------


def make_manifest(tmp_path):
    images = (np.arange(2 * 4 * 4) % 256).reshape(2, 4, 4) / 255.0
    ds = D.LabeledDataset(images, np.array([0, 1]), split="probe")
    D.save_idx(ds, tmp_path / "imgs.idx", tmp_path / "labs.idx")
    manifest = {"name": "toy", "format": "idx",
                "splits": {"probe": ["imgs.idx", "labs.idx"]},
                "sha256": {"imgs.idx": D.sha256_file(tmp_path / "imgs.idx"),
                           "labs.idx": D.sha256_file(tmp_path / "labs.idx")}}
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path


def test_validate_manifest_ok(tmp_path, capsys):
    path = make_manifest(tmp_path)
    assert run(["validate-manifest", path]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary == {"files_checked": 2, "format": "idx", "name": "toy"}


def test_validate_manifest_tampered_exits_3(tmp_path, capsys):
    path = make_manifest(tmp_path)
    blob = bytearray((tmp_path / "imgs.idx").read_bytes())
    blob[-1] ^= 0xFF
    (tmp_path / "imgs.idx").write_bytes(bytes(blob))
    assert run(["validate-manifest", path]) == 3
    assert "sha256" in capsys.readouterr().err


def test_validate_manifest_missing_file_exits_2(tmp_path):
    assert run(["validate-manifest", tmp_path / "nope.json"]) == 2


def test_manifest_backed_training_runs(tmp_path):
    path = make_manifest(tmp_path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "experiment": "mani",
        "dataset": {"kind": "manifest", "manifest": "manifest.json",
                    "train_split": "probe", "probe_split": "probe"},
        "train": {"epochs": 1, "pairs_per_epoch": 8, "batch_size": 4},
    }))
    out = tmp_path / "out"
    assert run(["train", "--config", cfg, "--out-dir", out]) == 0
    assert (out / "params.bin").exists()


# -- determinism -----------------------------------------------------------


def test_rerun_reproduces_artifacts_byte_for_byte(tmp_path):
    cfg = write_config(tmp_path, {"train.epochs": 2, "train.pairs_per_epoch": 128,
                                  "eval.n_pairs": 100})
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run(["train", "--config", cfg, "--out-dir", out]) == 0
        assert run(["eval", "--config", cfg, "--params", out / "params.bin",
                    "--out-dir", out]) == 0
        outs.append(out)
    for artifact in ("params.bin", "loss.csv", "config.json", "eval.json",
                     "results.csv"):
        assert (outs[0] / artifact).read_bytes() == (outs[1] / artifact).read_bytes()


def test_seed_flag_changes_training_stream(tmp_path):
    cfg = write_config(tmp_path, {"train.epochs": 1, "train.pairs_per_epoch": 64})
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["train", "--config", cfg, "--out-dir", a]) == 0
    assert run(["train", "--config", cfg, "--seed", 7, "--out-dir", b]) == 0
    assert (a / "params.bin").read_bytes() != (b / "params.bin").read_bytes()


# -- console entry point ---------------------------------------------------


def test_module_invocation_matches_main(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "absgen.cli", "validate-manifest",
         str(make_manifest(tmp_path))],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["files_checked"] == 2


def test_unknown_subcommand_fails():
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])
