import json

import numpy as np
import pytest

from fouriershape import pnm
from fouriershape.cli import main
from fouriershape.data import generate_sample
from fouriershape.fourier import read_descriptors_csv
from fouriershape.metrics import confusion_counts, scores
from fouriershape.trainer import load_model


@pytest.fixture()
def disk_mask(tmp_path):
    yy, xx = np.mgrid[:64, :64]
    mask = (np.hypot(yy - 32, xx - 32) <= 20).astype(np.uint8)
    path = tmp_path / "disk.pbm"
    pnm.write_pbm(path, mask)
    return path, mask


@pytest.fixture()
def blob_mask(tmp_path):
    sample = generate_sample(3, noise_sigma=0.0)
    path = tmp_path / "blob.pbm"
    pnm.write_pbm(path, sample.mask)
    return path, sample.mask


TINY = [
    "--data-seed", "5",
    "--train-count", "6",
    "--val-count", "3",
    "--test-count", "2",
    "--width", "64",
    "--height", "64",
]

FAST = TINY + ["--max-epochs", "2", "--patience", "none", "--batch-size", "4"]


# ----------------------------------------------------------------- describe


def test_describe_disk_writes_small_amplitudes(disk_mask, tmp_path, capsys):
    path, _ = disk_mask
    out = tmp_path / "desc.csv"
    assert main(["describe", str(path), "--order", "4", "--out", str(out)]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0].startswith("a0 ")
    assert len(lines) == 5
    desc = read_descriptors_csv(out)
    assert desc.order == 4
    assert np.all(desc.amplitudes / desc.a0 < 0.02)


def test_describe_missing_file_is_io_error(tmp_path, capsys):
    assert main(["describe", str(tmp_path / "nope.pbm")]) == 2
    assert "error:" in capsys.readouterr().err


def test_describe_rejects_order_zero(disk_mask, capsys):
    path, _ = disk_mask
    assert main(["describe", str(path), "--order", "0"]) == 1


def test_describe_corrupt_file_is_io_error(tmp_path, capsys):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n10 10\n255\nshort")
    assert main(["describe", str(bad)]) == 2


def test_describe_empty_mask_is_domain_error(tmp_path, capsys):
    path = tmp_path / "empty.pbm"
    pnm.write_pbm(path, np.zeros((8, 8), dtype=np.uint8))
    assert main(["describe", str(path)]) == 3


def test_describe_degenerate_object_is_domain_error(tmp_path, capsys):
    mask = np.zeros((8, 8), dtype=np.uint8)
    mask[3, 3:5] = 1
    path = tmp_path / "dot.pbm"
    pnm.write_pbm(path, mask)
    assert main(["describe", str(path)]) == 3


def test_unknown_flag_is_usage_error(disk_mask, capsys):
    path, _ = disk_mask
    assert main(["describe", str(path), "--bogus", "1"]) == 1


def test_describe_is_idempotent(disk_mask, tmp_path, capsys):
    path, _ = disk_mask
    out = tmp_path / "desc.csv"
    main(["describe", str(path), "--out", str(out)])
    first = out.read_bytes()
    main(["describe", str(path), "--out", str(out)])
    assert out.read_bytes() == first


# -------------------------------------------------------------- reconstruct


def test_reconstruct_emits_one_mask_per_order(blob_mask, tmp_path, capsys):
    path, mask = blob_mask
    outdir = tmp_path / "rec"
    code = main(
        ["reconstruct", str(path), "--orders", "1,2,8", "--outdir", str(outdir)]
    )
    assert code == 0
    files = sorted(p.name for p in outdir.iterdir())
    assert files == ["blob_order1.pbm", "blob_order2.pbm", "blob_order8.pbm"]

    def iou_with_source(name):
        rebuilt = pnm.read_mask(outdir / name)
        return scores(confusion_counts(mask, rebuilt)).iou

    assert iou_with_source("blob_order8.pbm") > iou_with_source("blob_order1.pbm")


def test_reconstruct_rejects_empty_or_bad_orders(blob_mask, tmp_path, capsys):
    path, _ = blob_mask
    outdir = str(tmp_path / "rec")
    assert main(["reconstruct", str(path), "--orders", ",", "--outdir", outdir]) == 1
    assert main(["reconstruct", str(path), "--orders", "0,2", "--outdir", outdir]) == 1
    assert main(["reconstruct", str(path), "--orders", "x", "--outdir", outdir]) == 1


# -------------------------------------------------------------------- train


def test_train_writes_all_artifacts(tmp_path, capsys):
    outdir = tmp_path / "run"
    code = main(
        ["train", "--loss", "cross-entropy", "--outdir", str(outdir)] + FAST
    )
    assert code == 0
    for name in ("model.bin", "runlog.jsonl", "config.json", "test_metrics.csv"):
        assert (outdir / name).exists()
    out = capsys.readouterr().out
    assert "stopped at epoch 2" in out
    assert "test iou" in out

    config = json.loads((outdir / "config.json").read_text())
    assert config["loss_kind"] == "cross-entropy"
    assert config["max_epochs"] == 2
    assert config["patience"] is None
    net, header = load_model(outdir / "model.bin")
    assert header["config"]["seed"] == 0
    lines = (outdir / "runlog.jsonl").read_text().strip().split("\n")
    assert len(lines) == 4  # epochs 0..2 plus the stop line
    assert json.loads(lines[-1])["stop_reason"] == "max_epochs"


def test_train_is_idempotent(tmp_path, capsys):
    outdir = tmp_path / "run"
    args = ["train", "--loss", "cross-entropy", "--outdir", str(outdir)] + FAST
    assert main(args) == 0
    first = (outdir / "model.bin").read_bytes()
    assert main(args) == 0
    assert (outdir / "model.bin").read_bytes() == first


def test_train_config_file_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("max-epochs = 1  # quick\nseed = 3\n\n# comment line\n")
    outdir = tmp_path / "run"
    code = main(
        ["train", "--loss", "cross-entropy", "--outdir", str(outdir),
         "--config", str(cfg)] + FAST
    )
    assert code == 0
    config = json.loads((outdir / "config.json").read_text())
    assert config["max_epochs"] == 1
    assert config["seed"] == 3


@pytest.mark.parametrize(
    "content",
    ["bogus = 1\n", "seed 3\n", "seed = abc\n"],
)
def test_train_config_file_errors_are_usage_errors(tmp_path, capsys, content):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(content)
    outdir = str(tmp_path / "run")
    code = main(
        ["train", "--loss", "cross-entropy", "--outdir", outdir,
         "--config", str(cfg)] + FAST
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "extra",
    [
        ["--loss", "dice"],
        ["--order", "0"],
        ["--order", "2", "--omega-init", "1.0"],
        ["--patience", "sometimes"],
    ],
)
def test_train_rejects_invalid_settings(tmp_path, capsys, extra):
    code = main(["train", "--outdir", str(tmp_path / "x")] + FAST + extra)
    assert code == 1


# --------------------------------------------------------------------- eval


def test_eval_oracle_is_perfect(tmp_path, capsys):
    out = tmp_path / "metrics.csv"
    code = main(["eval", "--oracle", "--split", "val", "--out", str(out)] + TINY)
    assert code == 0
    assert "val iou 1.0000 +- 0.0000" in capsys.readouterr().out
    assert out.exists()


def test_eval_trained_model(tmp_path, capsys):
    outdir = tmp_path / "run"
    assert main(
        ["train", "--loss", "cross-entropy", "--outdir", str(outdir)] + FAST
    ) == 0
    out = tmp_path / "metrics.csv"
    code = main(
        ["eval", "--model", str(outdir / "model.bin"), "--out", str(out)] + TINY
    )
    assert code == 0
    assert out.exists()


def test_eval_missing_model_is_io_error(tmp_path, capsys):
    code = main(
        ["eval", "--model", str(tmp_path / "no.bin"), "--out",
         str(tmp_path / "m.csv")] + TINY
    )
    assert code == 2


# ------------------------------------------------------------------ compare


def test_compare_runs_the_matrix(tmp_path, capsys):
    outdir = tmp_path / "cmp"
    code = main(
        ["compare", "--losses", "cross-entropy,fourier-fixed",
         "--seeds", "0,1", "--outdir", str(outdir)] + FAST
    )
    assert code == 0
    run_dirs = sorted(p.name for p in (outdir / "runs").iterdir())
    assert run_dirs == [
        "cross-entropy_seed0",
        "cross-entropy_seed1",
        "fourier-fixed_seed0",
        "fourier-fixed_seed1",
    ]
    for name in run_dirs:
        for artifact in ("model.bin", "runlog.jsonl", "test_metrics.csv"):
            assert (outdir / "runs" / name / artifact).exists()

    summary = (outdir / "summary.csv").read_text().strip().split("\n")
    assert summary[0] == "loss,precision,recall,fscore,iou,hausdorff"
    assert len(summary) == 3
    assert summary[1].startswith("cross-entropy,")
    assert "±" in summary[1]


def test_compare_same_seed_shares_epoch_zero_metrics(tmp_path, capsys):
    outdir = tmp_path / "cmp"
    assert main(
        ["compare", "--losses", "cross-entropy,fourier-fixed",
         "--seeds", "0", "--outdir", str(outdir)] + FAST
    ) == 0

    def first_record(kind):
        path = outdir / "runs" / f"{kind}_seed0" / "runlog.jsonl"
        return json.loads(path.read_text().split("\n", 1)[0])

    ce = first_record("cross-entropy")
    fixed = first_record("fourier-fixed")
    for key in ("val_precision", "val_recall", "val_fscore", "val_iou"):
        assert ce[key] == fixed[key]


def test_compare_rejects_bad_matrix_flags(tmp_path, capsys):
    outdir = str(tmp_path / "cmp")
    assert main(["compare", "--losses", "bogus", "--outdir", outdir] + FAST) == 1
    assert main(["compare", "--seeds", ",", "--outdir", outdir] + FAST) == 1
