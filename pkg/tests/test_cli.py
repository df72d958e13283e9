import numpy as np
import pytest

from manifoldwalk import cli
from manifoldwalk.imaging import raster


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_row(text):
    header, row = text.strip().splitlines()
    return dict(zip(header.split(","), row.split(",")))


def test_same_file_zero(capsys, tmp_path):
    p = tmp_path / "a.csv"
    rng = np.random.default_rng(0)
    np.savetxt(p, np.column_stack([rng.normal(size=(40, 3)), rng.integers(0, 2, 40)]), delimiter=",")
    code, out, _ = run(capsys, "similarity", str(p), str(p))
    assert code == 0
    assert float(parse_row(out)["distance"]) == 0.0


def test_noise_ordering(capsys):
    _, out1, _ = run(capsys, "similarity", "swiss_roll", "swiss_roll:1", "--n", "200")
    _, out4, _ = run(capsys, "similarity", "swiss_roll", "swiss_roll:4", "--n", "200")
    assert float(parse_row(out4)["distance"]) > float(parse_row(out1)["distance"])


def test_dimension_mismatch_exit_2(capsys, tmp_path):
    (tmp_path / "a.csv").write_text("1,2,0\n3,4,1\n5,6,0\n")
    (tmp_path / "b.csv").write_text("1,2,3,0\n3,4,5,1\n5,6,7,0\n")
    code, _, err = run(capsys, "similarity", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"))
    assert code == 2 and "dimension mismatch" in err


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "similarity", str(tmp_path / "nope.csv"), "moons")
    assert code == 2 and "nope.csv" in err


def test_numerical_exit_3(capsys):
    code, _, err = run(capsys, "similarity", "moons", "moons:1", "--n", "50", "--t", "5")
    assert code == 3 and "t <" in err


def test_usage_exit_2(capsys):
    code, _, err = run(capsys, "similarity", "moons", "moons", "--k", "0")
    assert code == 2 and "--k" in err


def test_different_sizes_subsampled(capsys, tmp_path):
    rng = np.random.default_rng(1)
    np.savetxt(tmp_path / "a.csv", np.column_stack([rng.normal(size=(30, 2)), np.zeros(30)]), delimiter=",")
    np.savetxt(tmp_path / "b.csv", np.column_stack([rng.normal(size=(45, 2)), np.zeros(45)]), delimiter=",")
    code, out, _ = run(capsys, "similarity", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"), "--k", "4")
    assert code == 0 and parse_row(out)["n"] == "30"


def test_images_and_dump(capsys, tmp_path, data_dir):
    a, b = data_dir / "scene_a.png", data_dir / "scene_b.png"
    prefix = tmp_path / "adj"
    code, out, _ = run(capsys, "similarity", str(a), str(b), "--max-pixels", "400",
                       "--dump-adjacency", str(prefix))
    assert code == 0 and float(parse_row(out)["distance"]) > 0
    A = np.loadtxt(f"{prefix}.1.txt")
    assert A.shape == (400, 400) and np.all(A.sum(axis=1) == 8)


def test_figure1_deterministic(capsys, tmp_path):
    args = ["figure1", "--seed", "42", "--n", "80", "--seeds", "2", "--levels", "1,2", "--threads", "1"]
    run(capsys, *args, "--out", str(tmp_path / "a.csv"))
    run(capsys, *args, "--out", str(tmp_path / "b.csv"))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    text = (tmp_path / "a.csv").read_bytes()
    assert b"\r" not in text and text.startswith(b"noise_level,sigma,measure,mean_distance,std,seeds\n")


def test_tables_markdown_and_missing_data(capsys, tmp_path, monkeypatch):
    code, _, _ = run(capsys, "tables", "--datasets", "moons", "--per-class", "5", "--levels", "1,2",
                     "--iterations", "1", "--n", "80", "--threads", "1",
                     "--out", str(tmp_path / "t.csv"), "--markdown", str(tmp_path / "t.md"))
    assert code == 0
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert len(rows) == 3 and rows[0].startswith("dataset,per_class,noise_level,sigma")
    assert (tmp_path / "t.md").read_text().count("| moons |") == 2
    monkeypatch.delenv("MANIFOLDWALK_DATA_DIR", raising=False)
    code, _, err = run(capsys, "tables", "--datasets", "real")
    assert code == 2
    for name in ("data_banknote_authentication.txt", "pendigits.tra", "sat.trn"):
        assert name in err


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nseed = 5\nn = 60\nseeds = 1\nlevels = 1\nthreads = 1\n")
    run(capsys, "figure1", "--config", str(cfg), "--out", str(tmp_path / "a.csv"))
    run(capsys, "figure1", "--config", str(cfg), "--seed", "6", "--out", str(tmp_path / "b.csv"))
    run(capsys, "figure1", "--seed", "5", "--n", "60", "--seeds", "1", "--levels", "1", "--threads", "1",
        "--out", str(tmp_path / "c.csv"))
    assert (tmp_path / "a.csv").read_text() == (tmp_path / "c.csv").read_text()
    assert (tmp_path / "a.csv").read_text() != (tmp_path / "b.csv").read_text()


def test_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just words\n")
    code, _, err = run(capsys, "figure1", "--config", str(cfg))
    assert code == 2 and "key=value" in err


def test_superpixel_command(capsys, tmp_path, data_dir):
    out = tmp_path / "sp.png"
    code, _, _ = run(capsys, "superpixel", str(data_dir / "scene_a.png"), str(out), "--segments", "1",
                     "--dump-segments", str(tmp_path / "seg.txt"), "--dump-palette", str(tmp_path / "pal.txt"))
    assert code == 0
    img = raster.read_image(out)
    assert len(np.unique(img.reshape(-1, 3), axis=0)) == 1
    assert np.loadtxt(tmp_path / "pal.txt").shape == (3,)
    assert np.loadtxt(tmp_path / "seg.txt").shape[0] == 40


def test_superpixel_study_command(capsys, data_dir):
    a = str(data_dir / "scene_a.png")
    code, out, _ = run(capsys, "superpixel-study", a, a, "--grids", "10")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "grid_size,n_segments,distance"
    assert [l.split(",")[2] for l in lines[1:]] == ["0.000000", "0.000000"]


def test_rank_command(capsys, tmp_path, data_dir):
    gallery = tmp_path / "g"
    (gallery / "a").mkdir(parents=True)
    ref = raster.read_image(data_dir / "scene_a.png")
    raster.write_image(gallery / "a" / "same.png", ref)
    raster.write_image(gallery / "a" / "other.png", raster.read_image(data_dir / "scene_b.png"))
    code, out, _ = run(capsys, "rank", str(data_dir / "scene_a.png"), str(gallery), "--superpixel", "100")
    assert code == 0
    assert out.splitlines()[1].startswith("1,a/same.png,0.000000")
    code, out, _ = run(capsys, "rank", str(data_dir / "scene_a.png"), str(gallery), "--class-average")
    assert out.splitlines()[1].startswith("a,") and len(out.splitlines()) == 2
    code, _, err = run(capsys, "rank", str(data_dir / "scene_a.png"), str(tmp_path / "nothing"))
    assert code == 2


def test_help_documents_schema(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["tables", "--help"])
    assert "mean_acc_tl_ungated" in capsys.readouterr().out
