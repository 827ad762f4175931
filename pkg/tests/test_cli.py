import pytest

from mmml.harness.cli import main
from mmml.harness.experiment import parse_report, summarize


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    assert main(["synth", "--out", str(root), "--classes", "3", "--sets-per-class", "6",
                 "--images", "15", "--d", "6", "--separation", "5", "--seed", "2"]) == 0
    return root / "manifest.csv"


HYPER = ["--q", "2", "--dz", "3"]


def test_ingest_check(dataset, capsys):
    assert main(["ingest-check", str(dataset)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[:4] == ["sets=18", "classes=3", "d=6", "min_images=15"]
    assert out[5:] == ["c00,6", "c01,6", "c02,6"]


def test_train_predict(dataset, tmp_path, capsys):
    model = tmp_path / "m.bin"
    assert main(["train", str(dataset), "--model", str(model), *HYPER]) == 0
    sets = dataset.parent / "sets"
    capsys.readouterr()
    assert main(["predict", "--model", str(model), str(sets / "c01_s03.txt")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "set_id,predicted,distance,label"
    set_id, predicted, distance, label = lines[1].split(",")
    assert predicted == "c01" and float(distance) == 0.0 and label == ""
    assert main(["predict", "--model", str(model), "--manifest", str(dataset)]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "accuracy=1.0"


def test_eval_report(dataset, tmp_path, capsys):
    out = tmp_path / "r.txt"
    assert main(["eval", str(dataset), *HYPER, "--gallery", "3", "--folds", "3", "--output", str(out)]) == 0
    report = parse_report(out.read_text())
    assert len(report.per_fold_accuracy) == 3
    assert (report.mean, report.std) == summarize(report.per_fold_accuracy)
    assert report.config_echo["q"] == "2" and report.config_echo["u"] == "0.8,0.2"


def test_eval_deterministic_across_jobs(dataset, capsys):
    args = ["eval", str(dataset), *HYPER, "--gallery", "2", "--probe", "3", "--folds", "4", "--seed", "9"]
    main(args)
    a = capsys.readouterr().out
    main(args + ["--jobs", "3"])
    b = capsys.readouterr().out
    assert a == b and a.startswith("# mmml report v1")


def test_sweep(dataset, capsys):
    assert main(["sweep", str(dataset), *HYPER, "--axis", "u2_given_u1", "--grid", "0,0.5,1",
                 "--folds", "2", "--gallery", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    i = lines.index("value,mean,std")
    assert [ln.split(",")[0] for ln in lines[i + 1:]] == ["0.0", "0.5", "1.0"]


@pytest.mark.parametrize("argv, message", [
    (["eval", "{ds}", "--gallery", "6"], "infeasible"),
    (["eval", "{ds}", "--q", "40"], "q = 40"),
    (["ingest-check", "{missing}"], "error"),
    (["predict", "--model", "{ds}", "{ds}"], "magic"),
])
def test_errors_exit_nonzero(dataset, tmp_path, capsys, argv, message):
    argv = [a.format(ds=dataset, missing=tmp_path / "nope.csv") for a in argv]
    assert main(argv) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and message in err


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["predict", "--model", "x.bin"])
    assert exc.value.code != 0
