from __future__ import annotations

import numpy as np
import pytest

from rotated_iforest import io
from rotated_iforest.datagen import SyntheticSpec, generate
from rotated_iforest.harness import (
    ExperimentConfig,
    fit_model,
    heatmap,
    manifest_files,
    run_real_benchmark,
    run_synthetic_experiment,
    synthetic_dataset,
)
from rotated_iforest.iforest import ForestParams
from rotated_iforest.rng import RngState

SMALL = ExperimentConfig(n_trees=20, psi=128, repetitions=3, seed=1)


class TestHeatmap:
    def test_grid_size(self):
        grid = heatmap(lambda p: p[:, 0], 30, 30)
        assert grid.scores.size == 900

    def test_single_cell_centre(self):
        grid = heatmap(lambda p: p[:, 0] * 10 + p[:, 1], 1, 1, (0.0, 2.0, -1.0, 1.0))
        assert grid.scores[0, 0] == pytest.approx(10.0)

    def test_constant(self):
        grid = heatmap(lambda p: np.full(len(p), 0.4), 5, 7)
        assert grid.shape == (5, 7)
        assert np.all(grid.scores == 0.4)

    def test_cell_centres_row_major(self):
        grid = heatmap(lambda p: p[:, 0], 2, 4)
        np.testing.assert_allclose(grid.xs, [0.125, 0.375, 0.625, 0.875])
        np.testing.assert_allclose(grid.ys, [0.25, 0.75])
        cells = list(grid.cells())
        assert cells[1][:2] == (0, 1) and cells[4][:2] == (1, 0)

    def test_requires_2d(self):
        pts = RngState(0).generator().random((50, 3))
        model = fit_model("iforest", pts, ForestParams(n_trees=3))
        with pytest.raises(ValueError, match="heatmap requires 2-D model"):
            heatmap(model, 3, 3)

    def test_model_scorer(self):
        pts = RngState(1).generator().normal(0.5, 0.05, (300, 2))
        model = fit_model("rif", pts, ForestParams(n_trees=10))
        grid = heatmap(model, 10, 10)
        assert grid.scores[0, 0] > grid.scores[5, 5]

    @pytest.mark.parametrize("bounds", [(1.0, 0.0, 0.0, 1.0), (0.0, 1.0, 0.5, 0.5)])
    def test_bad_bounds(self, bounds):
        with pytest.raises(ValueError):
            heatmap(lambda p: p[:, 0], 2, 2, bounds)


class TestSynthetic:
    def test_reports_and_heatmaps(self):
        res = run_synthetic_experiment("one_gaussian_corners", SMALL, grid=(6, 6))
        assert set(res.reports) == {"iforest", "eif", "rif"}
        for rep in res.reports.values():
            assert len(rep.runs) == 3
            assert rep.avg_auc > 0.9
            assert rep.contamination_data == pytest.approx(8 / 2008)
        assert res.heatmaps["eif"].shape == (6, 6)
        assert len(res.rows()) == 3

    def test_worker_pool_matches_serial(self):
        spec = SyntheticSpec("two_gaussians", n_normal=300, anomalies=(((0.5, 0.5), 2),))
        serial = run_synthetic_experiment(spec, SMALL)
        pooled = run_synthetic_experiment(spec, ExperimentConfig(**{**SMALL.__dict__, "workers": 4}))
        for algo in serial.reports:
            assert serial.reports[algo].repetitions == pooled.reports[algo].repetitions

    def test_data_depends_on_seed_only(self):
        a = synthetic_dataset("sinusoid", 5)
        b = synthetic_dataset("sinusoid", 5)
        np.testing.assert_array_equal(a.points, b.points)

    def test_zero_anomalies_fail_cleanly(self):
        with pytest.raises(RuntimeError, match="single-class labels"):
            run_synthetic_experiment(SyntheticSpec("one_gaussian", n_normal=200), SMALL)

    def test_contamination_override(self):
        cfg = ExperimentConfig(algorithms=("rif",), n_trees=10, repetitions=1, contamination={"rif": 0.05})
        rep = run_synthetic_experiment("one_gaussian_corners", cfg).reports["rif"]
        assert rep.contamination_algo == 0.05
        assert rep.runs[0].predicted.sum() == round(0.05 * 2008)

    @pytest.mark.parametrize("kwargs", [{"algorithms": ("svm",)}, {"repetitions": 0}, {"contamination": {"rif": 2.0}}])
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentConfig(**kwargs)


class TestRealBenchmark:
    def test_missing_file_continues(self, tmp_path):
        data = generate("two_gaussians", RngState(2).generator())
        io.save_csv(data, tmp_path / "good.csv")
        files = {"missing": tmp_path / "nope.csv", "good": tmp_path / "good.csv"}
        cfg = ExperimentConfig(n_trees=10, repetitions=5, seed=0)
        result = run_real_benchmark(files, cfg)
        assert "missing" in result.missing
        assert [(r.dataset, r.algorithm) for r in result.rows] == [("good", a) for a in ("iforest", "eif", "rif")]
        assert all(len(r.report.runs) == 5 for r in result.rows)
        again = run_real_benchmark(files, cfg)
        assert io.format_report(result.rows) == io.format_report(again.rows)

    def test_manifest_files(self, tmp_path):
        files = manifest_files(tmp_path, {"ionosphere": io.REAL_DATASETS["ionosphere"]})
        assert files["Ionosphere"].path == tmp_path / "Ionosphere.csv"
        assert files["Ionosphere"].anomaly_value == "B"
