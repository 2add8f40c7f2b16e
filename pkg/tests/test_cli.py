import os

import pytest

from config.settings import OUTPUT_DIR_ENV
from evaluation.reports import read_report
from graph.synthetic import make_block_dataset
from main import main


@pytest.fixture
def run_config(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    g = make_block_dataset(24, 24, n_blocks=3, p_in=0.5, noise=0.0, seed=2)
    data = tmp_path / "interactions.txt"
    data.write_text("".join(f"u{u} i{v}\n" for u, v in zip(g.users, g.items)), encoding="utf-8")

    def write(name="run.ini", seeds="1,2", output="out"):
        path = tmp_path / name
        path.write_text(
            "[data]\npath = interactions.txt\n\n"
            "[train]\ndim = 8\nlayers = 1\nepochs = 2\nbatch_size = 64\nlr = 0.05\n\n"
            f"[run]\nseeds = {seeds}\noutput_dir = {tmp_path / output}\n\n"
            "[experiment]\nnoise_ratios = 0.1,0.2\nnoise_variants = full,w/o-gib\n",
            encoding="utf-8",
        )
        return str(path)

    return write


def test_stats_counts(capsys):
    assert main(["stats", "--counts", "50821", "57440", "1172425"]) == 0
    lines = dict(line.split("\t") for line in capsys.readouterr().out.splitlines() if "\t" in line)
    assert lines["density_sci"] == "4.0e-4"
    assert lines["interactions"] == "1172425"


def test_stats_file(tmp_path, capsys):
    path = tmp_path / "toy.txt"
    path.write_text("a x\na y\nb x\n", encoding="utf-8")
    assert main(["stats", str(path)]) == 0
    out = capsys.readouterr().out
    assert "density\t0.75" in out
    assert "users\t2" in out


def test_stats_invalid_counts():
    assert main(["stats", "--counts", "2", "2", "5"]) == 1


def test_missing_dataset_exit_code(tmp_path):
    assert main(["stats", str(tmp_path / "yok.txt")]) == 2


def test_unknown_protocol_exit_code(run_config):
    with pytest.raises(SystemExit) as info:
        main(["experiment", "--protocol", "bilinmeyen", "--config", run_config()])
    assert info.value.code == 1


def test_bad_config_exit_code(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[data]\npath = x.txt\n[train]\ndim = iki\n", encoding="utf-8")
    assert main(["train", "--config", str(path)]) == 1


def test_train_writes_checkpoint_per_seed(tmp_path, run_config):
    assert main(["train", "--config", run_config(), "--quiet"]) == 0
    out = tmp_path / "out"
    assert sorted(os.listdir(out)) == ["checkpoint_seed1.npz", "checkpoint_seed2.npz",
                                       "epochs_seed1.tsv", "epochs_seed2.tsv"]
    header = (out / "epochs_seed1.tsv").read_text(encoding="utf-8").splitlines()[0]
    assert header.split("\t") == ["epoch", "l_bpr", "l_kl", "l_cl", "l_total", "lr"]


def test_train_is_deterministic(tmp_path, run_config):
    assert main(["train", "--config", run_config("a.ini", seeds="5", output="a"), "--quiet"]) == 0
    assert main(["train", "--config", run_config("b.ini", seeds="5", output="b"), "--quiet"]) == 0
    for name in ("checkpoint_seed5.npz", "epochs_seed5.tsv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_eval_checkpoint(tmp_path, run_config, capsys):
    assert main(["train", "--config", run_config(seeds="1"), "--quiet"]) == 0
    report_path = str(tmp_path / "eval.tsv")
    code = main(["eval", "--checkpoint", str(tmp_path / "out" / "checkpoint_seed1.npz"), "--output", report_path])
    assert code == 0
    metrics = {r.metric for r in read_report(report_path)}
    assert metrics == {"recall@20", "ndcg@20", "recall@40", "ndcg@40", "skipped_users"}
    assert "recall@20" in capsys.readouterr().out


def test_eval_missing_checkpoint(tmp_path):
    assert main(["eval", "--checkpoint", str(tmp_path / "yok.npz")]) == 2


def test_experiment_noise_report(tmp_path, run_config):
    code = main(["experiment", "--protocol", "noise", "--config", run_config(seeds="1"), "--quiet"])
    assert code == 0
    rows = read_report(str(tmp_path / "out" / "report_noise.tsv"))
    assert len(rows) == 4
    assert {(r.variant, r.group) for r in rows} == {
        ("full", "noise=0.1"), ("full", "noise=0.2"), ("w/o-gib", "noise=0.1"), ("w/o-gib", "noise=0.2")}


def test_train_abort_exit_code(run_config, monkeypatch):
    import main as cli
    from utils.errors import TrainingAborted

    def abort(*args, **kwargs):
        raise TrainingAborted(0, 1, "sonlu olmayan kayıp: nan")

    monkeypatch.setattr(cli, "train", abort)
    assert main(["train", "--config", run_config(), "--quiet"]) == 3
