from __future__ import annotations

import numpy as np
import pytest

from rotated_iforest import io
from rotated_iforest.cli import build_parser, main


@pytest.fixture
def synth(tmp_path):
    path = tmp_path / "data.csv"
    assert main(["synth", "--kind", "one_gaussian_corners", "--n-normal", "300", "--seed", "2", "--out", str(path)]) == 0
    return path


class TestParser:
    def test_grid_and_bounds(self):
        args = build_parser().parse_args(["heatmap", "--grid", "30x40", "--bounds=-1,1,0,2"])
        assert args.grid == (30, 40) and args.bounds == (-1.0, 1.0, 0.0, 2.0)

    def test_per_algorithm_contamination(self):
        args = build_parser().parse_args(
            ["eval", "--preset", "sinusoid", "--contamination", "iforest=0.2,rif=0.05", "--algo", "iforest,rif"]
        )
        assert args.contamination == {"iforest": 0.2, "rif": 0.05}
        assert args.algo == ("iforest", "rif")

    @pytest.mark.parametrize("argv", [["heatmap", "--grid", "3by3"], ["eval", "--algo", "svm"]])
    def test_rejects(self, argv):
        with pytest.raises(SystemExit):
            build_parser().parse_args(argv)


class TestCommands:
    def test_synth(self, synth):
        data = io.load_csv(synth)
        assert data.n == 308 and data.labels.sum() == 8

    def test_fit_score(self, synth, tmp_path, capsys):
        model = tmp_path / "m.bin"
        assert main(["fit", "--data", str(synth), "--algo", "eif", "--trees", "10", "--out", str(model)]) == 0
        out = tmp_path / "scores.csv"
        assert main(["score", "--model", str(model), "--data", str(synth), "--contamination", "0.05", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "index,score,predicted" and len(lines) == 309
        scores = np.array([float(l.split(",")[1]) for l in lines[1:]])
        np.testing.assert_array_equal(scores, io.load_model(model).score_samples(io.load_csv(synth).points))
        assert sum(int(l.split(",")[2]) for l in lines[1:]) == round(0.05 * 308)

    def test_eval_replays(self, synth, tmp_path):
        outs = []
        for i in range(2):
            out = tmp_path / f"r{i}.csv"
            argv = ["eval", "--data", str(synth), "--trees", "10", "--repetitions", "2", "--out", str(out)]
            assert main(argv) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        assert len(outs[0].decode().splitlines()) == 4

    def test_eval_preset_text(self, capsys):
        assert main(["eval", "--preset", "one_gaussian_corners", "--trees", "5", "--repetitions", "1", "--format", "text"]) == 0
        out = capsys.readouterr().out
        assert "one_gaussian_corners" in out and "rif" in out

    def test_heatmap(self, tmp_path, capsys):
        pgm = tmp_path / "h.pgm"
        assert main(["heatmap", "--preset", "two_gaussians", "--trees", "10", "--grid", "4x6", "--pgm", str(pgm)]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 25
        assert pgm.read_bytes().startswith(b"P5\n6 4\n255\n")

    def test_heatmap_rejects_3d(self, tmp_path):
        assert main(["synth", "--kind", "swiss_roll", "--n-normal", "50", "--out", str(tmp_path / "s.csv")]) == 0
        assert main(["heatmap", "--data", str(tmp_path / "s.csv"), "--trees", "3"]) == 2

    def test_bench_missing_files(self, tmp_path, capsys):
        assert main(["bench", "--data-dir", str(tmp_path), "--datasets", "Ionosphere", "--repetitions", "1"]) == 0
        assert capsys.readouterr().out.strip() == ",".join(io.REPORT_COLUMNS)

    def test_bad_file_exit_code(self, tmp_path):
        assert main(["fit", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m")]) == 2
