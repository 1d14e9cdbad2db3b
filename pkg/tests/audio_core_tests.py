import io
import os
import unittest
from pathlib import Path
import logging
import numpy as np
from scipy.io import wavfile
from pywmbench import audio_core

logger = logging.getLogger('pywmbench.audio_core')
logger.addHandler(logging.StreamHandler())
logger.setLevel(logging.INFO)

cwd = os.getcwd()
if cwd.endswith("tests"):
    os.chdir(Path(cwd).parent)


def make_wav(data: np.ndarray, sample_rate: int = 16000) -> io.BytesIO:
    stream = io.BytesIO()
    wavfile.write(stream, sample_rate, data)
    stream.seek(0)
    return stream


class WavIoTest(unittest.TestCase):

    def test_pcm16_scaling(self):
        buf = audio_core.load_wav(make_wav(np.array([16384], dtype=np.int16)))
        self.assertEqual(16000, buf.sample_rate)
        np.testing.assert_array_equal(buf.samples, [0.5])

    def test_stereo_is_averaged(self):
        buf = audio_core.load_wav(make_wav(np.array([[1.0, -1.0], [0.5, 0.25]], dtype=np.float32)))
        np.testing.assert_array_equal(buf.samples, [0.0, 0.375])

    def test_float32_round_trip(self):
        rng = np.random.default_rng(7)
        samples = rng.uniform(-1, 1, 16000)
        audio_core.save_wav(audio_core.AudioBuffer(samples, 16000), self.out_file, encoding="float32")
        buf = audio_core.load_wav(self.out_file)
        self.assertEqual(16000, buf.sample_rate)
        self.assertLess(np.max(np.abs(buf.samples - samples)), 1e-7)

        exact = samples.astype(np.float32).astype(np.float64)
        audio_core.save_wav(audio_core.AudioBuffer(exact, 16000), self.out_file, encoding="float32")
        np.testing.assert_array_equal(audio_core.load_wav(self.out_file).samples, exact)

    def test_pcm16_rounding_and_clipping(self):
        buf = audio_core.AudioBuffer(np.array([0.5, 2.0, -2.0, -0.5, 1.5 / 32768, -1.5 / 32768]), 16000)
        data = audio_core.encode_wav(buf, audio_core.WavEncoding.pcm16)
        self.assertEqual(b'RIFF', data[0:4])
        self.assertEqual(44 + 12, len(data))
        stored = np.frombuffer(data[44:], dtype='<i2')
        self.assertEqual([16384, 32767, -32768, -16384, 2, -2], stored.tolist())
        sample_rate, read_back = wavfile.read(io.BytesIO(data))
        self.assertEqual(16000, sample_rate)
        np.testing.assert_array_equal(stored, read_back)

    def test_file_handle(self):
        buf = audio_core.AudioBuffer(np.array([0.25, -0.25]), 8000)
        with open(self.out_file, 'wb') as stream:
            audio_core.save_wav(buf, stream)
        with open(self.out_file, 'rb') as stream:
            loaded = audio_core.load_wav(stream)
        self.assertEqual(8000, loaded.sample_rate)
        np.testing.assert_array_equal(buf.samples, loaded.samples)

    def test_errors(self):
        with self.assertRaises(audio_core.WavReadException):
            audio_core.load_wav("tests/files/does_not_exist.wav")
        with self.assertRaises(audio_core.WavReadException):
            audio_core.load_wav(io.BytesIO(b'RIFX garbage that is not a wav file'))
        with self.assertRaises(audio_core.UnsupportedEncodingException):
            audio_core.load_wav(make_wav(np.array([1, 2, 3], dtype=np.int32)))
        with self.assertRaises(audio_core.UnsupportedEncodingException):
            audio_core.load_wav(make_wav(np.zeros((4, 3), dtype=np.int16)))
        with self.assertRaises(audio_core.EmptyAudioException):
            audio_core.load_wav(make_wav(np.zeros(0, dtype=np.int16)))
        with self.assertRaises(audio_core.WavReadException):
            audio_core.load_wav(make_wav(np.array([0.0, np.nan], dtype=np.float32)))
        with self.assertRaises(audio_core.WavWriteException):
            audio_core.save_wav(audio_core.AudioBuffer([0.1], 16000), "tests/files/no_such_dir/x_out.wav")

    def setUp(self):
        self.out_file = 'tests/files/audio_core_out.wav'

    def tearDown(self):
        for p in Path("tests/files").glob("*_out.*"):
            p.unlink()


class ResampleTest(unittest.TestCase):

    def test_identity(self):
        buf = audio_core.AudioBuffer(np.random.default_rng(1).normal(size=500), 16000)
        out = audio_core.resample(buf, 16000)
        np.testing.assert_array_equal(buf.samples, out.samples)

    def test_sine_down_and_up(self):
        t = np.arange(16000) / 16000
        sine = np.sin(2 * np.pi * 1000 * t)
        down = audio_core.resample(audio_core.AudioBuffer(sine, 16000), 8000)
        self.assertEqual(8000, len(down))
        up = audio_core.resample(down, 16000)
        self.assertEqual(16000, len(up))
        lo, hi = int(0.1 * len(sine)), int(0.9 * len(sine))
        corr = np.corrcoef(sine[lo:hi], up.samples[lo:hi])[0, 1]
        self.assertGreater(corr, 0.999)

    def test_dc_preserved(self):
        for target in [8000, 11025, 22050, 44100]:
            buf = audio_core.AudioBuffer(np.full(8000, 0.3), 16000)
            out = audio_core.resample(buf, target).samples
            self.assertEqual(int(round(8000 * target / 16000)), len(out))
            lo, hi = int(0.1 * len(out)), int(0.9 * len(out))
            self.assertLess(np.max(np.abs(out[lo:hi] - 0.3)), 1e-3, f"DC drift at {target} Hz")


class StftTest(unittest.TestCase):

    def test_round_trip(self):
        spec = audio_core.FrameSpec(1024, 256, "hann")
        x = np.random.default_rng(3).uniform(-1, 1, 16000)
        out = audio_core.istft(audio_core.stft(audio_core.AudioBuffer(x, 16000), spec)).samples
        covered = spec.frame_len - spec.hop
        end = len(out) - covered
        self.assertLess(np.max(np.abs(out[covered:end] - x[covered:end])), 1e-6)

    def test_round_trip_rect(self):
        spec = audio_core.FrameSpec(512, 256, "rect")
        x = np.random.default_rng(4).uniform(-1, 1, 4096)
        out = audio_core.istft(audio_core.stft(audio_core.AudioBuffer(x, 16000), spec)).samples
        self.assertLess(np.max(np.abs(out[256:len(out) - 256] - x[256:len(out) - 256])), 1e-6)

    def test_padded_round_trip(self):
        spec = audio_core.FrameSpec()
        x = np.random.default_rng(5).uniform(-1, 1, 5000)
        spg = audio_core.padded_stft(audio_core.AudioBuffer(x, 16000), spec)
        out = audio_core.unpad(audio_core.istft(spg).samples, spec, len(x))
        self.assertLess(np.max(np.abs(out - x)), 1e-6)

    def test_zero_signal(self):
        spec = audio_core.FrameSpec()
        spg = audio_core.stft(audio_core.AudioBuffer(np.zeros(4096), 16000), spec)
        self.assertFalse(np.any(spg.frames))
        self.assertFalse(np.any(audio_core.istft(spg).samples))

    def test_impulse_at_frame_center(self):
        spec = audio_core.FrameSpec()
        x = np.zeros(1024)
        x[512] = 1.0
        spg = audio_core.stft(audio_core.AudioBuffer(x, 16000), spec)
        self.assertEqual((1, 513), spg.frames.shape)
        np.testing.assert_allclose(spg.magnitude()[0], spec.window_values()[512], atol=1e-12)

    def test_non_cola_rejected(self):
        spec = audio_core.FrameSpec(1024, 300, "hann")
        self.assertFalse(spec.is_cola())
        spg = audio_core.stft(audio_core.AudioBuffer(np.ones(4096), 16000), spec)
        with self.assertRaises(audio_core.FrameSpecException):
            audio_core.istft(spg)

    def test_invalid_hop(self):
        with self.assertRaises(audio_core.FrameSpecException):
            audio_core.FrameSpec(256, 512)


class DctTest(unittest.TestCase):

    def test_constant_vector(self):
        coeffs = audio_core.dct_ii(np.full(16, 0.25))
        self.assertAlmostEqual(0.25 * 4.0, coeffs[0], places=12)
        self.assertLess(np.max(np.abs(coeffs[1:])), 1e-12)

    def test_round_trip_and_parseval(self):
        x = np.random.default_rng(11).normal(size=2048)
        coeffs = audio_core.dct_ii(x)
        self.assertLess(np.max(np.abs(audio_core.idct(coeffs) - x)), 1e-9)
        self.assertLess(abs(np.linalg.norm(x) - np.linalg.norm(coeffs)), 1e-9)

    def test_too_short(self):
        with self.assertRaises(ValueError):
            audio_core.dct_ii(np.array([1.0]))


class FeatureTest(unittest.TestCase):

    def test_filterbank_rows_sum_to_one(self):
        for n_mels in [20, 40, 80]:
            fb = audio_core.mel_filterbank(n_mels, audio_core.FrameSpec(), 16000)
            self.assertEqual((n_mels, 513), fb.shape)
            np.testing.assert_allclose(fb.sum(axis=1), 1.0, atol=1e-6)

    def test_silence(self):
        spg = audio_core.stft(audio_core.AudioBuffer(np.zeros(4096), 16000), audio_core.FrameSpec())
        features = audio_core.log_mel(spg, 40)
        self.assertEqual(audio_core.FeatureKind.log_mel, features.kind)
        np.testing.assert_array_equal(features.rows, np.log(1e-10))

    def test_mfcc_deterministic(self):
        buf = audio_core.AudioBuffer(np.random.default_rng(2).normal(scale=0.1, size=8000), 16000)
        first = audio_core.compute_mfcc(buf, audio_core.FrameSpec(), 40, 13)
        second = audio_core.compute_mfcc(buf, audio_core.FrameSpec(), 40, 13)
        self.assertEqual(13, first.dim)
        self.assertEqual(audio_core.FrameSpec().num_frames(8000), first.num_frames)
        np.testing.assert_array_equal(first.rows, second.rows)

    def test_invalid_sizes(self):
        spg = audio_core.stft(audio_core.AudioBuffer(np.zeros(512), 16000), audio_core.FrameSpec(256, 64))
        with self.assertRaises(ValueError):
            audio_core.log_mel(spg, 200)
        with self.assertRaises(ValueError):
            audio_core.mfcc(audio_core.log_mel(spg, 20), 20)


class GriffinLimTest(unittest.TestCase):

    def test_sine_peak_and_convergence(self):
        sr = 16000
        spec = audio_core.FrameSpec()
        sine = 0.5 * np.sin(2 * np.pi * 440 * np.arange(sr) / sr)
        magnitude = audio_core.padded_stft(audio_core.AudioBuffer(sine, sr), spec).magnitude()
        history = []
        out = audio_core.griffin_lim(magnitude, spec, iterations=60, seed=5,
                                     callback=lambda i, sc: history.append(sc)).samples
        self.assertEqual(60, len(history))
        self.assertTrue(all(b <= a + 1e-6 for a, b in zip(history, history[1:])),
                        "Spectral convergence increased between iterations.")
        spectrum = np.abs(np.fft.rfft(out))
        peak_hz = np.argmax(spectrum) * sr / len(out)
        self.assertLessEqual(abs(peak_hz - 440), sr / len(out))

    def test_zero_magnitude(self):
        spec = audio_core.FrameSpec()
        out = audio_core.griffin_lim(np.zeros((10, spec.num_bins)), spec, iterations=5, seed=0)
        self.assertEqual(9 * 256 + 1024, len(out))
        self.assertFalse(np.any(out.samples))

    def test_deterministic(self):
        spec = audio_core.FrameSpec()
        noise = np.random.default_rng(8).normal(scale=0.1, size=6000)
        magnitude = audio_core.stft(audio_core.AudioBuffer(noise, 16000), spec).magnitude()
        first = audio_core.griffin_lim(magnitude, spec, iterations=10, seed=42)
        second = audio_core.griffin_lim(magnitude, spec, iterations=10, seed=42)
        np.testing.assert_array_equal(first.samples, second.samples)

    def test_dimension_mismatch(self):
        with self.assertRaises(audio_core.DimensionException):
            audio_core.griffin_lim(np.ones((4, 100)), audio_core.FrameSpec(), iterations=2, seed=0)
        with self.assertRaises(ValueError):
            audio_core.griffin_lim(np.ones((4, 513)), audio_core.FrameSpec(), iterations=0, seed=0)


class PitchTest(unittest.TestCase):

    def test_sine_200hz(self):
        sr = 16000
        sine = 0.5 * np.sin(2 * np.pi * 200 * np.arange(sr) / sr)
        track = audio_core.estimate_f0(audio_core.AudioBuffer(sine, sr), audio_core.FrameSpec())
        self.assertGreater(track.voiced_fraction, 0.9)
        voiced = track.f0[track.voicing]
        self.assertLess(np.max(np.abs(voiced - 200)), 3)

    def test_white_noise_unvoiced(self):
        noise = np.random.default_rng(9).normal(scale=0.1, size=16000)
        track = audio_core.estimate_f0(audio_core.AudioBuffer(noise, 16000), audio_core.FrameSpec())
        self.assertGreater(1.0 - track.voiced_fraction, 0.9)

    def test_silence_unvoiced(self):
        track = audio_core.estimate_f0(audio_core.AudioBuffer(np.zeros(8000), 16000), audio_core.FrameSpec())
        self.assertFalse(np.any(track.voicing))
        self.assertFalse(np.any(track.f0))


if __name__ == '__main__':
    unittest.main()
