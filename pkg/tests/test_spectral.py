import numpy as np
import pytest

from src.audio import AudioBuffer
from src.errors import ConfigurationError
from src.features import (
    erb_bandwidth,
    gammatone_filterbank,
    gammatone_spectrogram,
    hz_to_mel,
    mel_filterbank,
    mel_to_hz,
    mfsc,
    stft,
)
from src.features.spectral import erb_rate_to_hz, fft_bin_freqs, gammatone_centers, hz_to_erb_rate, mel_band_edges

from .conftest import FS, tone


class TestStft:
    def test_geometry(self):
        spec = stft(tone(440.0))
        assert spec.values.shape == (257, 251)
        assert spec.frame_rate == pytest.approx(250.0)
        assert spec.bin_freqs[1] == pytest.approx(31.25)

    def test_dc_peaks_in_bin_zero(self):
        spec = stft(AudioBuffer(np.full(8000, 0.5), FS))
        assert int(np.argmax(np.abs(spec.values[:, 60]))) == 0

    def test_1khz_peaks_in_bin_32(self):
        spec = stft(tone(1000.0))
        mags = np.abs(spec.values[:, 10:-10]).mean(axis=1)
        assert int(np.argmax(mags)) == 32

    def test_invalid_frame(self):
        with pytest.raises(ConfigurationError):
            stft(tone(440.0), frame_len=600, n_fft=512)


class TestMel:
    def test_htk_reference_value(self):
        assert float(hz_to_mel(700.0)) == pytest.approx(781.17, abs=0.05)
        assert float(mel_to_hz(hz_to_mel(1234.5))) == pytest.approx(1234.5)

    def test_default_bank(self):
        fb = mel_filterbank()
        assert fb.weights.shape == (24, 257)
        assert (fb.weights >= 0).all()
        assert (fb.weights.max(axis=1) > 0).all()
        assert np.all(np.diff(fb.center_freqs) > 0)

    def test_neighbours_cross_at_half(self):
        fb = mel_filterbank()
        edges = mel_band_edges(24, 0.0, FS / 2)
        freqs = fft_bin_freqs(512, FS)
        for i in range(23):
            between = (freqs > edges[i + 1]) & (freqs < edges[i + 2])
            np.testing.assert_allclose(fb.weights[i, between] + fb.weights[i + 1, between], 1.0, atol=1e-9)

    def test_filters_between_bins_rejected(self):
        with pytest.raises(ConfigurationError, match="fall between"):
            mel_filterbank(n_filters=128, n_fft=64, fs=FS)

    def test_mfsc_shape_and_peak(self):
        feat = mfsc(tone(1000.0))
        assert feat.values.shape == (24, 251)
        assert (feat.values >= 0).all()
        fb = mel_filterbank()
        assert int(np.argmax(feat.values[:, 10:-10].mean(axis=1))) == int(np.argmax(fb.weights[:, 32]))


class TestGammatone:
    def test_erb_reference_value(self):
        assert float(erb_bandwidth(1000.0)) == pytest.approx(132.6, abs=0.05)
        assert float(erb_rate_to_hz(hz_to_erb_rate(440.0))) == pytest.approx(440.0)

    def test_centres(self):
        c = gammatone_centers(24, 32.7, FS)
        assert c[0] == pytest.approx(32.7)
        assert np.all(np.diff(c) > 0)
        assert c[-1] < FS / 2

    def test_bank_rows_peak_at_one(self):
        fb = gammatone_filterbank()
        assert fb.weights.shape == (24, 257)
        np.testing.assert_allclose(fb.weights.max(axis=1), 1.0)

    def test_spectrogram_shape(self):
        feat = gammatone_spectrogram(tone(1000.0))
        assert feat.values.shape == (24, 251)
        assert (feat.values >= 0).all()

    def test_low_edge_must_be_below_nyquist(self):
        with pytest.raises(ConfigurationError):
            gammatone_centers(24, 9000.0, FS)
