import numpy as np
import pandas as pd
import pytest

from src.analysis import (
    AfMfMap,
    energy_spectral_density,
    f_ratio,
    f_ratio_against_reference,
    filterbank_response,
    grad_cam,
    scale_center_frequencies,
    time_average_msf,
    upsample_bilinear,
    write_curve_csv,
    write_grid_csv,
)
from src.errors import ConfigurationError
from src.features import TimeFrequencyMatrix, design_modulation_filterbank
from src.features.models import ModulationTensor
from src.model import NetworkModel, NetworkSpec, forward
from src.model.network import head_scores

AF = np.geomspace(32.7, 6644.0, 24)
MF = 0.5 * 2.0 ** np.arange(8)


def _maps(samples):
    """samples: (n, C, M) -> list of AfMfMap"""
    return [AfMfMap(values=s, af_freqs=AF[:s.shape[0]], mf_freqs=MF[:s.shape[1]]) for s in samples]


class TestTimeAverage:
    def test_mean_over_frames(self, rng):
        values = rng.random((24, 8, 30))
        m = time_average_msf(ModulationTensor(values=values, af_freqs=AF, mf_freqs=MF, frame_rate=250.0))
        np.testing.assert_allclose(m.values, values.mean(axis=2))
        assert m.values.shape == (24, 8)

    def test_empty_tensor(self):
        with pytest.raises(ConfigurationError):
            time_average_msf(ModulationTensor(values=np.zeros((24, 8, 0)), af_freqs=AF, mf_freqs=MF))

    def test_shape_must_match_axes(self):
        with pytest.raises(ConfigurationError):
            AfMfMap(values=np.zeros((3, 3)), af_freqs=AF, mf_freqs=MF)


class TestFRatio:
    def test_reference_value(self):
        a = _maps(np.array([0.9, 1.0, 1.1]).reshape(3, 1, 1) * np.ones((3, 2, 2)))
        b = _maps(np.array([1.9, 2.0, 2.1]).reshape(3, 1, 1) * np.ones((3, 2, 2)))
        np.testing.assert_allclose(f_ratio(a, b).values, 50.0)

    def test_identical_classes_give_zero(self, rng):
        a = _maps(rng.random((5, 24, 8)))
        np.testing.assert_array_equal(f_ratio(a, a).values, 0.0)

    def test_symmetric_and_invariant_to_shift_and_scale(self, rng):
        a, b = rng.random((6, 4, 3)), rng.random((7, 4, 3)) + 0.5
        ref = f_ratio(_maps(a), _maps(b)).values
        np.testing.assert_allclose(f_ratio(_maps(b), _maps(a)).values, ref)
        np.testing.assert_allclose(f_ratio(_maps(3.0 * a - 2.0), _maps(3.0 * b - 2.0)).values, ref)

    def test_separated_gaussians(self):
        rng = np.random.default_rng(2024)
        n = 400
        a = rng.normal(0.0, 0.1, size=(n, 24, 8))
        b = rng.normal(1.0, 0.1, size=(n, 24, 8))
        ratio = f_ratio(_maps(a), _maps(b)).values
        assert ratio.mean() == pytest.approx(50.0, rel=0.02)
        assert np.all(ratio > 30.0)

    def test_same_distribution_is_near_zero(self):
        rng = np.random.default_rng(99)
        a = rng.normal(0.0, 0.1, size=(400, 24, 8))
        b = rng.normal(0.0, 0.1, size=(400, 24, 8))
        assert f_ratio(_maps(a), _maps(b)).values.max() < 0.05

    def test_zero_variance_cells(self):
        a = _maps(np.stack([np.array([[1.0, 5.0]])] * 3))
        b = _maps(np.stack([np.array([[2.0, 5.0]])] * 3))
        result = f_ratio(a, b)
        assert np.isinf(result.values[0, 0])
        assert result.values[0, 1] == 0.0
        np.testing.assert_array_equal(result.infinite_cells, [[0, 0]])

    def test_needs_two_maps_per_class(self, rng):
        with pytest.raises(ConfigurationError, match=">= 2"):
            f_ratio(_maps(rng.random((1, 2, 2))), _maps(rng.random((3, 2, 2))))

    def test_against_reference(self, rng):
        by_label = {lab: _maps(rng.random((4, 3, 2))) for lab in ("neu", "ang", "sad")}
        out = f_ratio_against_reference(by_label, "neu")
        assert sorted(out) == ["ang", "sad"]
        np.testing.assert_allclose(out["ang"].values, f_ratio(by_label["ang"], by_label["neu"]).values)
        with pytest.raises(ConfigurationError):
            f_ratio_against_reference(by_label, "joy")


class TestSpectralDensity:
    def test_mean_power(self):
        a = TimeFrequencyMatrix(values=np.full((2, 5), 3 + 4j), bin_freqs=[100.0, 200.0], frame_rate=250.0)
        b = TimeFrequencyMatrix(values=np.full((2, 7), 2.0), bin_freqs=[100.0, 200.0], frame_rate=250.0)
        np.testing.assert_allclose(energy_spectral_density([a, b]), [14.5, 14.5])

    def test_geometry_mismatch(self):
        a = TimeFrequencyMatrix(values=np.ones((2, 5)), bin_freqs=[100.0, 200.0], frame_rate=250.0)
        b = TimeFrequencyMatrix(values=np.ones((2, 5)), bin_freqs=[100.0, 300.0], frame_rate=250.0)
        with pytest.raises(ConfigurationError):
            energy_spectral_density([a, b])
        with pytest.raises(ConfigurationError):
            energy_spectral_density([])


class TestFilterResponses:
    def test_modulation_channels_peak_at_centre(self):
        fb = design_modulation_filterbank(env_rate=250.0)
        freqs, resp = filterbank_response(fb.kernels, 250.0, n_points=2048)
        assert resp.shape == (8, 2048)
        assert freqs[-1] == pytest.approx(125.0)
        for i, fc in enumerate(fb.centers[1:6], start=1):
            assert freqs[np.argmax(resp[i])] == pytest.approx(fc, abs=max(0.05 * fc, 0.15))

    def test_no_kernels(self):
        with pytest.raises(ConfigurationError):
            filterbank_response([], 250.0)

    def test_scale_centres(self):
        scales = scale_center_frequencies(96, 32.7, 16000.0)
        assert set(scales) == {"mel", "constant-q", "gammatone"}
        for centres in scales.values():
            assert len(centres) == 96
            assert centres[0] == pytest.approx(32.7)
            assert np.all(np.diff(centres) > 0)
        ratios = scales["constant-q"][1:] / scales["constant-q"][:-1]
        np.testing.assert_allclose(ratios, ratios[0])
        assert scales["constant-q"][10] < scales["mel"][10]

    def test_invalid_span(self):
        with pytest.raises(ConfigurationError):
            scale_center_frequencies(96, 9000.0, 16000.0)


class TestGradCam:
    @pytest.fixture
    def model(self):
        spec = NetworkSpec(n_classes=3, kernel_sizes=(3, 3), n_filters=4, fc_units=6, dropout_p=0.0)
        return NetworkModel.initialize(spec, seed=4, dtype=np.float64)

    def test_map_shape_and_sign(self, model, rng):
        x = rng.standard_normal((16, 20))
        cam = grad_cam(model, x, 1)
        assert cam.values.shape == (16, 20)
        assert (cam.values >= 0).all()
        assert cam.coarse.shape == (8, 20)
        assert cam.alphas.shape == (4,)

    def test_alphas_are_mean_activation_gradients(self, model, rng):
        x = rng.standard_normal((16, 12))
        target = 2
        cam = grad_cam(model, x, target)
        _, cache = forward(model, x)
        act = cache.final_activation
        h = 1e-6
        for k in range(act.shape[0]):
            up, down = act.copy(), act.copy()
            up[k] += h
            down[k] -= h
            slope = (head_scores(model, up)[target] - head_scores(model, down)[target]) / (2 * h)
            assert cam.alphas[k] == pytest.approx(slope / act[k].size, rel=1e-4, abs=1e-9)

    def test_class_out_of_range(self, model, rng):
        with pytest.raises(ConfigurationError):
            grad_cam(model, rng.standard_normal((16, 12)), 3)

    def test_upsample_keeps_corners(self):
        grid = np.array([[0.0, 1.0], [2.0, 3.0]])
        up = upsample_bilinear(grid, (3, 3))
        np.testing.assert_allclose(up[[0, 0, -1, -1], [0, -1, 0, -1]], [0, 1, 2, 3])
        assert up[1, 1] == pytest.approx(1.5)


class TestExport:
    def test_grid_csv(self, tmp_path):
        path = write_grid_csv(tmp_path / "maps" / "g.csv", np.arange(6.0).reshape(3, 2), [100, 200, 400], [0.5, 1])
        frame = pd.read_csv(path, index_col=0)
        assert frame.index.name == "af_hz"
        assert list(frame.columns) == ["0.5", "1"]
        np.testing.assert_allclose(frame.values, np.arange(6.0).reshape(3, 2))

    def test_curve_csv(self, tmp_path):
        path = write_curve_csv(tmp_path / "c.csv", [1.0, 2.0], [0.25, 0.5], value_name="esd")
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["freq_hz", "esd"]
        np.testing.assert_allclose(frame["esd"], [0.25, 0.5])
