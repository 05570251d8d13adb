"""Fixtures, parameter sweeps, robustness studies and report writers."""

import json

import numpy as np
import pytest
from PIL import Image

from selseg.fitting import FittingSpec
from selseg.harness import (
    FIXTURE_KINDS,
    HeatmapReport,
    SweepGrid,
    default_grid,
    make_fixture,
    randomize_markers,
    robustness_study,
    sweep,
    write_heatmap_csv,
    write_heatmap_json,
    write_heatmap_png,
    write_robustness_csv,
    write_robustness_json,
)
from selseg.metrics import tc_color
from selseg.solver import SolverConfig


class TestMakeFixture:
    def test_two_equal_geometry_at_reference_size(self):
        fx = make_fixture("two-equal", size=128)
        assert fx.image.shape == (128, 128)
        assert set(np.unique(fx.image.data)) == {0.0, 0.5}
        # Discs of radius 22 centered at x=36 and x=92 on the midline.
        assert fx.image.data[64, 36] == 0.5
        assert fx.image.data[64, 92] == 0.5
        assert fx.image.data[64, 64] == 0.0
        assert int(fx.ground_truth.data.sum()) == 1517
        assert fx.ground_truth.data[64, 36] == 1
        assert fx.ground_truth.data[64, 92] == 0
        assert fx.markers == ((29, 59), (43, 59), (36, 72))

    def test_markers_inside_ground_truth(self):
        for kind in FIXTURE_KINDS:
            for size in (48, 96, 128):
                fx = make_fixture(kind, size=size)
                assert len(fx.markers) == 3
                assert len(set(fx.markers)) == 3
                for x, y in fx.markers:
                    assert fx.ground_truth.data[y, x] == 1, (kind, size)

    def test_contrast_values(self):
        fx = make_fixture("contrast", size=128)
        assert fx.image.data[64, 36] == 0.75
        assert fx.image.data[64, 92] == 0.49
        assert fx.image.data[0, 0] == 0.0

    def test_noisy_fixture_is_deterministic(self):
        a = make_fixture("noisy-two-equal", size=64)
        b = make_fixture("noisy-two-equal", size=64)
        assert np.array_equal(a.image.data, b.image.data)
        base = make_fixture("two-equal", size=64)
        assert not np.array_equal(a.image.data, base.image.data)
        assert np.array_equal(a.ground_truth.data, base.ground_truth.data)

    def test_validation(self):
        with pytest.raises(ValueError):
            make_fixture("bad-kind")
        with pytest.raises(ValueError):
            make_fixture("two-equal", size=16)


class TestSweepGrid:
    def test_default_grid_axes(self):
        grid = default_grid()
        want = tuple(float(v) for v in list(range(1, 11)) + list(range(15, 51, 5)))
        assert grid.lambda_values == want
        assert grid.theta_values == want
        assert len(want) * len(want) == 324

    def test_values_coerced_to_float(self):
        grid = SweepGrid(lambda_values=(1, 2), theta_values=(3,))
        assert grid.lambda_values == (1.0, 2.0)
        assert grid.theta_values == (3.0,)

    def test_validation(self):
        with pytest.raises(ValueError):
            SweepGrid(lambda_values=())
        with pytest.raises(ValueError):
            SweepGrid(theta_values=(1.0, 0.0))


@pytest.fixture(scope="module")
def small_fixture():
    return make_fixture("two-equal", size=48)


@pytest.fixture(scope="module")
def small_sweep(small_fixture):
    grid = SweepGrid(lambda_values=(2.0, 3.0), theta_values=(2.0, 3.0))
    return sweep(small_fixture, FittingSpec(model="pm"), grid=grid)


class TestSweep:
    def test_report_shape_and_best(self, small_sweep):
        assert small_sweep.tc.shape == (2, 2)
        assert small_sweep.iterations.shape == (2, 2)
        assert small_sweep.converged.dtype == bool
        lam, theta, tc = small_sweep.best
        assert lam in (2.0, 3.0) and theta in (2.0, 3.0)
        assert tc == small_sweep.tc.max()

    def test_scores_in_unit_interval(self, small_sweep):
        assert small_sweep.tc.min() >= 0.0
        assert small_sweep.tc.max() <= 1.0

    def test_fraction_at_least(self, small_sweep):
        assert small_sweep.fraction_at_least(0.0) == 1.0
        assert small_sweep.fraction_at_least(1.1) == 0.0
        frac = small_sweep.fraction_at_least(0.9)
        assert frac == float((small_sweep.tc >= 0.9).mean())

    def test_best_cell_stable_under_axis_permutation(self, small_fixture):
        spec = FittingSpec(model="pm")
        fwd = sweep(
            small_fixture,
            spec,
            grid=SweepGrid(lambda_values=(2.0, 3.0), theta_values=(2.0, 3.0)),
        )
        rev = sweep(
            small_fixture,
            spec,
            grid=SweepGrid(lambda_values=(3.0, 2.0), theta_values=(3.0, 2.0)),
        )
        assert fwd.best == rev.best
        assert np.array_equal(fwd.tc, rev.tc[::-1, ::-1])

    def test_custom_markers_accepted(self, small_fixture):
        grid = SweepGrid(lambda_values=(3.0,), theta_values=(3.0,))
        rep = sweep(
            small_fixture,
            FittingSpec(model="pm"),
            grid=grid,
            markers=[(11, 21), (15, 21), (13, 27)],
        )
        assert rep.tc.shape == (1, 1)


class TestRandomizeMarkers:
    def test_deterministic_per_seed(self, small_fixture):
        a = randomize_markers(small_fixture.ground_truth, seed=5)
        b = randomize_markers(small_fixture.ground_truth, seed=5)
        assert a == b
        c = randomize_markers(small_fixture.ground_truth, seed=6)
        assert a != c

    def test_markers_inside_and_distinct(self, small_fixture):
        for seed in range(10):
            pts = randomize_markers(small_fixture.ground_truth, count=3, seed=seed)
            assert len(set(pts)) == 3
            for x, y in pts:
                assert small_fixture.ground_truth.data[y, x] == 1

    def test_generator_stream_advances(self, small_fixture):
        rng = np.random.default_rng(0)
        a = randomize_markers(small_fixture.ground_truth, rng=rng)
        b = randomize_markers(small_fixture.ground_truth, rng=rng)
        assert a != b

    def test_too_many_markers_rejected(self):
        fx = make_fixture("two-equal", size=48)
        count = int(fx.ground_truth.data.sum()) + 1
        with pytest.raises(ValueError):
            randomize_markers(fx.ground_truth, count=count)


@pytest.fixture(scope="module")
def small_robustness(small_fixture):
    return robustness_study(
        small_fixture, FittingSpec(model="pm"), trials=4, seed=3
    )


class TestRobustness:
    def test_deterministic_rerun(self, small_fixture, small_robustness):
        again = robustness_study(
            small_fixture, FittingSpec(model="pm"), trials=4, seed=3
        )
        assert np.array_equal(small_robustness.tc, again.tc)
        assert small_robustness.marker_sets == again.marker_sets

    def test_tukey_fences(self, small_robustness):
        q1, q3 = np.percentile(small_robustness.tc, [25.0, 75.0])
        assert small_robustness.q1 == float(q1)
        assert small_robustness.q3 == float(q3)
        iqr = q3 - q1
        assert small_robustness.lo_fence == float(q1 - 1.5 * iqr)
        assert small_robustness.hi_fence == float(q3 + 1.5 * iqr)
        flagged = set(small_robustness.outliers)
        for i, v in enumerate(small_robustness.tc):
            is_out = v < small_robustness.lo_fence or v > small_robustness.hi_fence
            assert (i in flagged) == is_out

    def test_non_outlier_min(self, small_robustness):
        keep = [
            v
            for i, v in enumerate(small_robustness.tc)
            if i not in set(small_robustness.outliers)
        ]
        assert small_robustness.non_outlier_min == min(keep)

    def test_zero_trials_rejected(self, small_fixture):
        with pytest.raises(ValueError):
            robustness_study(small_fixture, FittingSpec(model="pm"), trials=0)


class TestWriters:
    def test_heatmap_csv(self, small_sweep, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_heatmap_csv(small_sweep, p1)
        write_heatmap_csv(small_sweep, p2)
        raw = p1.read_bytes()
        assert raw == p2.read_bytes()
        lines = raw.decode("ascii").splitlines()
        assert lines[0] == "lambda,theta,tc,iterations,converged"
        assert len(lines) == 1 + 4
        first = lines[1].split(",")
        assert float(first[0]) == 2.0 and float(first[1]) == 2.0
        assert raw.endswith(b"\n")

    def test_heatmap_json(self, small_sweep, tmp_path):
        path = tmp_path / "a.json"
        write_heatmap_json(small_sweep, path)
        doc = json.loads(path.read_text())
        assert doc["lambda_values"] == [2.0, 3.0]
        assert doc["best"]["lambda"] == small_sweep.best[0]
        assert doc["tc"][0][0] == float(small_sweep.tc[0, 0])
        write_heatmap_json(small_sweep, tmp_path / "b.json")
        assert path.read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_heatmap_png_blocks(self, small_sweep, tmp_path):
        path = tmp_path / "a.png"
        write_heatmap_png(small_sweep, path, cell=4)
        arr = np.asarray(Image.open(path).convert("RGB"))
        assert arr.shape == (8, 8, 3)
        for i in range(2):
            for j in range(2):
                want = tc_color(float(small_sweep.tc[i, j]))
                block = arr[4 * i : 4 * i + 4, 4 * j : 4 * j + 4]
                assert np.array_equal(block, np.broadcast_to(want, block.shape))

    def test_robustness_csv(self, small_robustness, tmp_path):
        p1, p2 = tmp_path / "r.csv", tmp_path / "r2.csv"
        write_robustness_csv(small_robustness, p1)
        write_robustness_csv(small_robustness, p2)
        raw = p1.read_bytes()
        assert raw == p2.read_bytes()
        lines = raw.decode("ascii").splitlines()
        assert lines[0] == "trial,x1,y1,x2,y2,x3,y3,tc"
        assert len(lines) == 1 + 4
        row = lines[1].split(",")
        assert row[0] == "0"
        x1, y1 = int(row[1]), int(row[2])
        assert (x1, y1) == small_robustness.marker_sets[0][0]

    def test_robustness_json(self, small_robustness, tmp_path):
        path = tmp_path / "r.json"
        write_robustness_json(small_robustness, path)
        doc = json.loads(path.read_text())
        assert doc["trials"] == 4
        assert doc["median"] == small_robustness.median
        assert doc["non_outlier_min"] == small_robustness.non_outlier_min
        assert doc["tc"] == [float(v) for v in small_robustness.tc]


class TestHeatmapReport:
    def test_fraction_with_constructed_scores(self):
        grid = SweepGrid(lambda_values=(1.0, 2.0), theta_values=(1.0,))
        rep = HeatmapReport(
            fixture_name="two-equal",
            model="pm",
            grid=grid,
            tc=np.array([[1.0], [0.5]]),
            iterations=np.array([[10], [20]]),
            converged=np.array([[True], [True]]),
            best=(1.0, 1.0, 1.0),
        )
        assert rep.fraction_at_least(0.9) == 0.5
