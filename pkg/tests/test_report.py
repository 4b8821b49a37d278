import numpy as np
import pytest

from amrbench import report
from amrbench.errors import ConsistencyError, InvalidInputError


class TestTrendFit:
    def test_two_points_exact_interpolation(self):
        fit = report.fit_trend([(100, 0.5), (10_000, 0.7)])
        assert fit.predict(100) == pytest.approx(0.5)
        assert fit.predict(10_000) == pytest.approx(0.7)
        assert np.allclose(fit.residuals, 0.0)

    def test_constant_accuracy_zero_slope(self):
        fit = report.fit_trend([(100, 0.6), (1_000, 0.6), (10_000, 0.6)])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)
        assert fit.intercept == pytest.approx(0.6)

    def test_matches_normal_equations(self):
        # oracle: closed-form least squares via the normal equations
        points = [(120, 0.41), (5_500, 0.52), (40_000, 0.55), (900_000, 0.61),
                  (2_000_000, 0.58)]
        x = np.log10([p for p, _ in points])
        y = np.array([a for _, a in points])
        design = np.stack([x, np.ones_like(x)], axis=1)
        slope_ref, intercept_ref = np.linalg.solve(design.T @ design, design.T @ y)
        fit = report.fit_trend(points)
        assert fit.slope == pytest.approx(slope_ref, abs=1e-10)
        assert fit.intercept == pytest.approx(intercept_ref, abs=1e-10)

    def test_degenerate_x_rejected(self):
        with pytest.raises(InvalidInputError):
            report.fit_trend([(100, 0.5), (100, 0.7)])

    def test_single_point_rejected(self):
        with pytest.raises(InvalidInputError):
            report.fit_trend([(100, 0.5)])


class _FakeRun:
    def __init__(self, model_id, accuracy, params, augmented=False,
                 corpus_hash="h1", per_snr=None, curriculum=None):
        self.model_id = model_id
        self.is_augmented = augmented
        self.display_name = model_id + ("+BiLSTM-GRU" if augmented else "")
        self.corpus_hash = corpus_hash
        self.overall_accuracy = accuracy
        self.summary = {
            "param_count": params, "batch_size": 400, "learning_rate": 1e-3,
            "stop_epoch": 17, "overall_accuracy": f"{accuracy:.8f}",
        }
        self.per_snr = per_snr or {s: accuracy for s in range(-20, 20, 2)}
        self.per_modulation = {"BPSK": accuracy, "QPSK": accuracy}
        self.curriculum = curriculum
        self.path = "fake"


class TestTables:
    def test_single_run_table1(self, tmp_path):
        runs = [_FakeRun("GRU", 0.55, 151_179)]
        written = report.emit_tables(runs, tmp_path)
        lines = written["table1"].read_text().splitlines()
        assert len(lines) == 2
        assert lines[1].startswith("GRU,151179,400,")
        assert lines[1].endswith("0.5500")

    def test_table3_base_aug_delta(self, tmp_path):
        runs = [_FakeRun("MCLDNN", 0.5982, 405_887),
                _FakeRun("MCLDNN", 0.6580, 483_903, augmented=True)]
        written = report.emit_tables(runs, tmp_path)
        lines = written["table3"].read_text().splitlines()
        assert lines[1] == "MCLDNN,0.5982,0.6580,0.0598"

    def test_table2_column_order_matches_class_names(self, tmp_path):
        from amrbench.sigsynth import CLASS_NAMES
        runs = [_FakeRun("GRU", 0.5, 151_179)]
        written = report.emit_tables(runs, tmp_path)
        header = written["table2"].read_text().splitlines()[0].split(",")
        assert header == ["model", *CLASS_NAMES]

    def test_mixed_corpus_rejected(self, tmp_path):
        runs = [_FakeRun("GRU", 0.5, 151_179, corpus_hash="a"),
                _FakeRun("LSTM", 0.5, 200_075, corpus_hash="b")]
        with pytest.raises(ConsistencyError):
            report.emit_tables(runs, tmp_path)


class TestFigures:
    def test_fig2_csv_geometry(self, tmp_path):
        runs = [_FakeRun("GRU", 0.5, 151_179), _FakeRun("LSTM", 0.6, 200_075)]
        written = report.emit_figures(runs, tmp_path)
        lines = written["fig2_csv"].read_text().splitlines()
        header = lines[0].split(",")
        assert len(header) == 1 + len(runs)  # snr column + one per model
        data = [l.split(",") for l in lines[1:]]
        assert len(data) == 20
        values = [cell for row in data for cell in row[1:] if cell]
        assert len(values) == len(runs) * 20

    def test_fig2_polyline_vertices(self, tmp_path):
        runs = [_FakeRun("GRU", 0.5, 151_179)]
        written = report.emit_figures(runs, tmp_path)
        svg = written["fig2_svg"].read_text()
        polylines = [l for l in svg.splitlines() if "<polyline" in l]
        assert len(polylines) == 1
        assert polylines[0].count(",") == 20  # 20 x,y vertices

    def test_fig3_three_bars_per_scenario(self, tmp_path):
        curriculum = [
            {"scenario": "[0,18]", "acc_low": "0.1", "acc_high": "0.5",
             "acc_overall": "0.3"},
            {"scenario": "[-20,18]", "acc_low": "0.2", "acc_high": "0.4",
             "acc_overall": "0.3"},
        ]
        runs = [_FakeRun("MCLDNN", 0.6, 405_887)]
        cur = _FakeRun("MCLDNN", 0.6, 405_887, curriculum=curriculum)
        written = report.emit_figures(runs, tmp_path, curriculum_run=cur)
        svg = written["fig3_svg"].read_text()
        bars = [l for l in svg.splitlines() if "<rect" in l and "fill=\"#" in l]
        legend_boxes = 3
        assert len(bars) == 3 * len(curriculum) + legend_boxes
        lines = written["fig3_csv"].read_text().splitlines()
        assert lines[0] == "scenario,acc_low,acc_high,acc_overall"
        assert len(lines) == 1 + len(curriculum)

    def test_emission_deterministic(self, tmp_path):
        runs = [_FakeRun("GRU", 0.51234, 151_179), _FakeRun("CNN1", 0.54, 1_592_383)]
        a, b = tmp_path / "a", tmp_path / "b"
        w1 = report.emit_figures(runs, a)
        w2 = report.emit_figures(runs, b)
        for key in w1:
            assert w1[key].read_bytes() == w2[key].read_bytes()

    def test_svg_self_contained(self, tmp_path):
        runs = [_FakeRun("GRU", 0.5, 151_179)]
        written = report.emit_figures(runs, tmp_path)
        for key in ("fig1_svg", "fig2_svg"):
            svg = written[key].read_text()
            assert svg.startswith("<?xml")
            assert 'version="1.1"' in svg
            assert "http://" not in svg.replace("http://www.w3.org/2000/svg", "")

    def test_accuracy_rendering_precision(self, tmp_path):
        runs = [_FakeRun("GRU", 0.123456789, 151_179)]
        written = report.emit_tables(runs, tmp_path)
        assert "0.1235" in written["table1"].read_text()  # 4 decimals
        assert "0.12" in written["table2"].read_text()    # 2 decimals
