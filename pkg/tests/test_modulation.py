import numpy as np
import pytest

from src.errors import ConfigurationError
from src.features import (
    FusedFeature,
    TimeFrequencyMatrix,
    cqt,
    design_cqt_atoms,
    design_modulation_filterbank,
    envelope,
    fuse,
    log_compress,
    magnitude,
    modulation_only,
    msf,
    unfuse,
)

from .conftest import FS, am_signal

# Frames whose longest (0.5 Hz, q=2) kernel lies fully inside a 6 s envelope
INTERIOR = slice(500, 1000)


def _constant_env(value=2.0, rows=3, frames=1501, rate=250.0):
    return TimeFrequencyMatrix(values=np.full((rows, frames), value), bin_freqs=np.arange(1, rows + 1) * 100.0,
                               frame_rate=rate)


class TestFilterbank:
    def test_octave_centres(self):
        fb = design_modulation_filterbank()
        np.testing.assert_allclose(fb.centers, [0.5, 1, 2, 4, 8, 16, 32, 64])
        assert len(fb) == 8

    def test_top_channel_must_stay_below_envelope_nyquist(self):
        with pytest.raises(ConfigurationError, match="Nyquist"):
            design_modulation_filterbank(0.5, 10, env_rate=250.0)

    def test_q_doubles_kernel_length(self):
        short = design_modulation_filterbank(q_mod=1.0).lengths
        long = design_modulation_filterbank(q_mod=2.0).lengths
        assert np.all(np.abs(long - 2 * short) <= 1)
        assert long[0] == 1000

    @pytest.mark.parametrize("kwargs", [dict(f0=0.0), dict(n_channels=0), dict(q_mod=-1.0)])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            design_modulation_filterbank(**kwargs)


class TestEnvelopeAndMsf:
    def test_envelope_is_modulus(self):
        tf = TimeFrequencyMatrix(values=np.array([[3 + 4j, -1j]]), bin_freqs=[100.0], frame_rate=250.0)
        np.testing.assert_allclose(envelope(tf).values, [[5.0, 1.0]])

    @pytest.mark.parametrize("rate, channel", [(2.0, 2), (4.0, 3), (8.0, 4), (16.0, 5)])
    def test_am_rate_localises_in_its_channel(self, rate, channel):
        atoms = design_cqt_atoms(32.7, FS / 2, fs=FS)
        env = magnitude(cqt(am_signal(1000.0, rate), atoms))
        fb = design_modulation_filterbank(0.5, 8, q_mod=2.0, env_rate=env.frame_rate)
        mod = msf(env, fb)

        k = int(np.argmin(np.abs(atoms.freqs - 1000.0)))
        profile = mod.values[k, :, INTERIOR].mean(axis=1)
        assert int(np.argmax(profile)) == channel

    @pytest.mark.parametrize("rate, channel", [(2.0, 2), (4.0, 3), (8.0, 4), (16.0, 5)])
    def test_am_rate_localises_at_default_q(self, rate, channel):
        atoms = design_cqt_atoms(32.7, FS / 2, fs=FS)
        env = magnitude(cqt(am_signal(1000.0, rate), atoms))
        mod = msf(env, design_modulation_filterbank(env_rate=env.frame_rate))

        k = int(np.argmin(np.abs(atoms.freqs - 1000.0)))
        profile = mod.values[k, :, INTERIOR].mean(axis=1)
        assert int(np.argmax(profile)) == channel
        # next channel up is the strongest competitor
        assert profile[channel + 1] < 0.95 * profile[channel]

    def test_constant_envelope_has_no_modulation(self):
        fb = design_modulation_filterbank(0.5, 8, q_mod=2.0, env_rate=250.0)
        mod = msf(_constant_env(2.0), fb)
        assert mod.shape == (3, 8, 1501)
        interior = mod.values[:, :, INTERIOR]
        assert interior[:, :4].max() < 1e-9
        assert interior.max() < 0.01 * 2.0

    def test_constant_envelope_at_default_q(self):
        fb = design_modulation_filterbank(env_rate=250.0)
        assert msf(_constant_env(2.0), fb).values[:, :, INTERIOR].max() < 1e-9

    def test_unit_q_passes_dc_into_every_channel_without_mean_removal(self):
        fb = design_modulation_filterbank(0.5, 8, q_mod=1.0, env_rate=250.0)
        leaked = msf(_constant_env(2.0), fb, remove_mean=False).values[:, :, INTERIOR]
        profile = leaked.mean(axis=2) / 2.0
        np.testing.assert_allclose(profile, 0.25, atol=0.02)
        assert leaked.min() > 0.2 * 2.0

    @pytest.mark.parametrize("shift", [1, 10])
    def test_delay_shifts_frames(self, rng, shift):
        values = rng.random((3, 400))
        fb = design_modulation_filterbank(env_rate=250.0)
        ref = msf(TimeFrequencyMatrix(values=values, bin_freqs=[1.0, 2.0, 3.0], frame_rate=250.0), fb,
                  remove_mean=False).values
        padded = np.hstack([np.zeros((3, shift)), values])
        delayed = msf(TimeFrequencyMatrix(values=padded, bin_freqs=[1.0, 2.0, 3.0], frame_rate=250.0), fb,
                      remove_mean=False).values
        np.testing.assert_allclose(delayed[:, :, shift:], ref, atol=1e-10)

    def test_rate_mismatch(self):
        fb = design_modulation_filterbank(env_rate=250.0)
        with pytest.raises(ConfigurationError):
            msf(_constant_env(rate=100.0), fb)

    def test_complex_input_rejected(self):
        tf = TimeFrequencyMatrix(values=np.ones((2, 300), dtype=complex), bin_freqs=[1.0, 2.0], frame_rate=250.0)
        with pytest.raises(ConfigurationError, match="envelope"):
            msf(tf, design_modulation_filterbank(env_rate=250.0))


class TestFusion:
    @pytest.fixture
    def parts(self, rng):
        tf = TimeFrequencyMatrix(values=rng.random((24, 50)), bin_freqs=np.geomspace(32.7, 6644, 24),
                                 frame_rate=250.0)
        fb = design_modulation_filterbank(env_rate=250.0)
        return tf, msf(tf, fb)

    def test_row_layout(self, parts):
        tf, mod = parts
        feat = fuse(tf, mod)
        assert feat.values.shape == (216, 50)
        np.testing.assert_array_equal(feat.values[:24], tf.values)
        np.testing.assert_array_equal(feat.values[24], mod.values[0, 0])
        np.testing.assert_array_equal(feat.values[24 + 8 * 5 + 3], mod.values[5, 3])
        assert feat.row_layout[24].source == "modulation"
        assert (feat.row_layout[24].af_index, feat.row_layout[24].mf_index) == (0, 0)

    def test_shape_mismatch(self, parts):
        tf, mod = parts
        short = TimeFrequencyMatrix(values=tf.values[:, :40], bin_freqs=tf.bin_freqs, frame_rate=250.0)
        with pytest.raises(ConfigurationError):
            fuse(short, mod)

    def test_unfuse_is_exact(self, parts):
        tf, mod = parts
        tf2, mod2 = unfuse(fuse(tf, mod))
        np.testing.assert_array_equal(tf2.values, tf.values)
        np.testing.assert_array_equal(mod2.values, mod.values)

    def test_modulation_only(self, parts):
        _, mod = parts
        feat = modulation_only(mod)
        assert feat.n_rows == 192
        assert all(d.source == "modulation" for d in feat.row_layout)


class TestLogCompress:
    def test_values_and_type(self):
        tf = TimeFrequencyMatrix(values=np.array([[0.0, 9.0, 99.0]]), bin_freqs=[1.0], frame_rate=1.0)
        out = log_compress(tf, eps=1.0)
        assert isinstance(out, TimeFrequencyMatrix)
        np.testing.assert_allclose(out.values, [[0.0, 1.0, 2.0]])
        assert log_compress(tf).values[0, 0] == pytest.approx(-10.0)

    def test_fused_stays_fused(self):
        feat = FusedFeature(values=np.ones((2, 3)), row_layout=[])
        assert isinstance(log_compress(feat), FusedFeature)

    def test_rejects_negative_and_complex(self):
        with pytest.raises(ConfigurationError):
            log_compress(TimeFrequencyMatrix(values=np.array([[-1.0]]), bin_freqs=[1.0], frame_rate=1.0))
        with pytest.raises(ConfigurationError):
            log_compress(TimeFrequencyMatrix(values=np.array([[1j]]), bin_freqs=[1.0], frame_rate=1.0))
