import logging

import numpy as np
import pytest
from scipy.io import wavfile

from src.audio import (
    AudioBuffer,
    DatasetManifest,
    UtteranceRecord,
    load_manifest,
    read_wav,
    resample,
    segment_features,
    write_manifest,
    write_wav,
)
from src.audio.synthetic import am_tone, carrier_pools
from src.errors import AudioError, ConfigurationError, ManifestError, WavNotFoundError

from .conftest import tone


class TestWav:
    def test_pcm16_round_trip(self, tmp_path):
        buf = tone(440.0, duration_s=0.25)
        path = write_wav(tmp_path / "a.wav", buf)
        back = read_wav(path)
        assert back.rate == 16000.0
        assert len(back) == len(buf)
        np.testing.assert_allclose(back.samples, buf.samples, atol=1.0 / 32768)

    def test_float32_round_trip(self, tmp_path):
        buf = tone(440.0, duration_s=0.1)
        back = read_wav(write_wav(tmp_path / "f.wav", buf, encoding="float32"))
        np.testing.assert_allclose(back.samples, buf.samples, atol=1e-7)

    def test_stereo_is_averaged(self, tmp_path):
        left = np.full(100, 1000, dtype=np.int16)
        right = np.full(100, 3000, dtype=np.int16)
        wavfile.write(str(tmp_path / "s.wav"), 8000, np.stack([left, right], axis=1))
        buf = read_wav(tmp_path / "s.wav")
        np.testing.assert_allclose(buf.samples, 2000 / 32768.0)
        assert buf.rate == 8000.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(WavNotFoundError):
            read_wav(tmp_path / "nope.wav")

    def test_garbage_file(self, tmp_path):
        path = tmp_path / "bad.wav"
        path.write_bytes(b"hello, this is not a RIFF file at all")
        with pytest.raises(AudioError):
            read_wav(path)

    def test_empty_buffer_rejected_downstream(self):
        with pytest.raises(AudioError):
            AudioBuffer(samples=np.zeros(0), rate=16000.0).require_samples()

    def test_non_positive_rate(self):
        with pytest.raises(AudioError):
            AudioBuffer(samples=np.zeros(4), rate=0.0)


class TestResample:
    def test_length_and_rate(self):
        buf = tone(440.0, duration_s=1.0, rate=44100.0)
        out = resample(buf, 16000.0)
        assert out.rate == 16000.0
        assert len(out) == round(44100 * 16000 / 44100)

    def test_tone_frequency_preserved(self):
        out = resample(tone(1000.0, duration_s=1.0, rate=22050.0), 16000.0)
        spectrum = np.abs(np.fft.rfft(out.samples))
        freqs = np.fft.rfftfreq(len(out), 1.0 / out.rate)
        assert abs(freqs[np.argmax(spectrum)] - 1000.0) <= 1.0

    def test_equal_rate_is_a_copy(self):
        buf = tone(440.0, duration_s=0.1)
        out = resample(buf, 16000.0)
        np.testing.assert_array_equal(out.samples, buf.samples)
        assert out.samples is not buf.samples


class TestManifest:
    def _write(self, path, text):
        path.write_text(text, encoding="utf-8")
        return path

    def test_records_and_label_order(self, tmp_path):
        p = self._write(tmp_path / "m.csv", "path,speaker,emotion,duration_s\n"
                                            "a.wav,s1,sad,1.0\nb.wav,s2,happy,\nc.wav,s1,sad,2.5\n")
        m = load_manifest(p)
        assert [r.path for r in m.records] == ["a.wav", "b.wav", "c.wav"]
        assert m.label_set == ["sad", "happy"]
        assert m.speakers() == ["s1", "s2"]
        assert m.records[1].duration_s == 0.0
        assert m.audio_path(m.records[0]) == tmp_path / "a.wav"

    def test_missing_column(self, tmp_path):
        p = self._write(tmp_path / "m.csv", "path,speaker,duration_s\na.wav,s1,1\n")
        with pytest.raises(ManifestError, match="emotion"):
            load_manifest(p)

    def test_duplicate_path_reports_line(self, tmp_path):
        p = self._write(tmp_path / "m.csv", "path,speaker,emotion,duration_s\na.wav,s1,x,1\na.wav,s2,y,1\n")
        with pytest.raises(ManifestError) as exc:
            load_manifest(p)
        assert exc.value.line == 3

    def test_line_numbers_count_blank_lines(self, tmp_path):
        p = self._write(tmp_path / "m.csv", "path,speaker,emotion,duration_s\na.wav,s1,x,1\n\n\na.wav,s2,y,1\n")
        with pytest.raises(ManifestError) as exc:
            load_manifest(p)
        assert exc.value.line == 5
        assert "first seen on line 2" in str(exc.value)

    def test_blank_lines_are_skipped(self, tmp_path):
        p = self._write(tmp_path / "m.csv", "path,speaker,emotion,duration_s\n\na.wav,s1,x,1\n\nb.wav,s2,y,1\n")
        assert [r.path for r in load_manifest(p).records] == ["a.wav", "b.wav"]

    def test_header_only_is_empty(self, tmp_path):
        p = self._write(tmp_path / "m.csv", "path,speaker,emotion,duration_s\n")
        with pytest.raises(ManifestError, match="Empty"):
            load_manifest(p)

    def test_unknown_column_is_ignored_with_warning(self, tmp_path, caplog):
        p = self._write(tmp_path / "m.csv", "path,speaker,emotion,duration_s,notes\na.wav,s1,x,1,loud\n")
        with caplog.at_level(logging.WARNING, logger="src.audio.manifest"):
            m = load_manifest(p)
        assert m.records == [UtteranceRecord("a.wav", "s1", "x", 1.0)]
        assert "notes" in caplog.text

    def test_missing_field(self, tmp_path):
        p = self._write(tmp_path / "m.csv", "path,speaker,emotion,duration_s\na.wav,,x,1\n")
        with pytest.raises(ManifestError, match="speaker"):
            load_manifest(p)

    def test_bad_duration(self, tmp_path):
        p = self._write(tmp_path / "m.csv", "path,speaker,emotion,duration_s\na.wav,s1,x,long\n")
        with pytest.raises(ManifestError, match="duration"):
            load_manifest(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError):
            load_manifest(tmp_path / "none.csv")

    def test_write_then_load(self, tmp_path):
        records = [UtteranceRecord("x/1.wav", "s1", "ang", 1.5), UtteranceRecord("x/2.wav", "s2", "neu", 2.0)]
        m = load_manifest(write_manifest(tmp_path / "out.csv", records))
        assert m.records == records

    def test_label_outside_set(self):
        with pytest.raises(ManifestError):
            DatasetManifest(records=[UtteranceRecord("a.wav", "s", "joy")], label_set=["sad"])


class TestSegments:
    def test_half_overlap(self):
        feat = np.arange(2 * 250, dtype=float).reshape(2, 250)
        segs = segment_features(feat, seg_len=100, overlap_fraction=0.5)
        assert len(segs) == 4
        np.testing.assert_array_equal(segs[1], feat[:, 50:150])
        assert all(s.shape == (2, 100) for s in segs)

    def test_short_input_is_zero_padded(self):
        feat = np.ones((3, 60))
        (seg,) = segment_features(feat, seg_len=100)
        assert seg.shape == (3, 100)
        assert seg[:, :60].sum() == 180
        assert not seg[:, 60:].any()

    def test_invalid_overlap(self):
        with pytest.raises(ConfigurationError):
            segment_features(np.ones((2, 200)), overlap_fraction=1.0)


class TestSynthetic:
    def test_am_tone_envelope_peak(self):
        buf = am_tone(1000.0, 4.0, 1.0, amplitude=0.5)
        assert np.max(np.abs(buf.samples)) <= 0.5 + 1e-12
        assert len(buf) == 16000

    def test_carrier_pools_disjoint(self):
        pools = carrier_pools(4)
        assert pools.shape == (4, 2)
        np.testing.assert_allclose(pools[1:, 0], pools[:-1, 1])

    def test_corpus_manifest(self, corpus_dir):
        m = load_manifest(corpus_dir / "manifest.csv")
        assert len(m.records) == 12
        assert m.speakers() == ["spk00", "spk01", "spk02"]
        assert m.label_set == ["am2hz", "am8hz"]
        buf = read_wav(m.audio_path(m.records[0]))
        assert len(buf) == 8000
