import unittest
import logging
import numpy as np
from pywmbench import channel
from pywmbench.audio_core import AudioBuffer
from pywmbench.evalharness.corpus import gen_test_corpus
from pywmbench.selfvc.quality import log_spectral_distance
from pywmbench.utils.errors import ConfigException
from pywmbench.utils.signal_math import power, snr_db

logger = logging.getLogger('pywmbench.channel')
logger.addHandler(logging.StreamHandler())
logger.setLevel(logging.INFO)


class NoiseMixingTest(unittest.TestCase):

    def setUp(self):
        # alternating +-1 has power exactly 1
        self.signal = AudioBuffer(np.tile([1.0, -1.0], 8000), 16000)

    def test_scaled_noise_power(self):
        noise = channel.make_noise(channel.NoiseKind.white, 16000, 16000, seed=1)
        out = channel.add_noise_at_snr(self.signal, noise, 10.0)
        self.assertAlmostEqual(0.1, power(out.samples - self.signal.samples), delta=1e-9)

    def test_measured_snr_for_every_kind(self):
        for kind in channel.NoiseKind:
            noise = channel.make_noise(kind, 5000, 16000, seed=4)
            for target in [10.0, 17.5, 30.0]:
                out = channel.add_noise_at_snr(self.signal, noise, target)
                self.assertAlmostEqual(target, snr_db(self.signal.samples, out.samples), delta=0.01,
                                       msg=f"SNR mismatch for {kind.value} noise")

    def test_higher_snr_is_closer(self):
        noise = channel.make_noise(channel.NoiseKind.pink, 16000, 16000, seed=2)
        loud = channel.add_noise_at_snr(self.signal, noise, 10.0)
        quiet = channel.add_noise_at_snr(self.signal, noise, 30.0)
        self.assertLess(np.linalg.norm(quiet.samples - self.signal.samples),
                        np.linalg.norm(loud.samples - self.signal.samples))

    def test_zero_signal(self):
        noise = channel.make_noise(channel.NoiseKind.white, 100, 16000, seed=0)
        with self.assertRaises(channel.SnrUndefinedException):
            channel.add_noise_at_snr(AudioBuffer(np.zeros(100), 16000), noise, 20.0)


class NoiseGenerationTest(unittest.TestCase):

    def test_deterministic(self):
        for kind in channel.NoiseKind:
            first = channel.make_noise(kind, 8000, 16000, seed=9)
            second = channel.make_noise(kind, 8000, 16000, seed=9)
            np.testing.assert_array_equal(first.samples, second.samples)
            self.assertAlmostEqual(0.1, np.sqrt(power(first.samples)), places=9)

    def test_white_mean(self):
        noise = channel.make_noise(channel.NoiseKind.white, 16000, 16000, seed=3)
        self.assertLess(abs(np.mean(noise.samples)), 0.01)

    def test_pink_slope(self):
        sr = 16000
        noise = channel.make_noise(channel.NoiseKind.pink, 4 * sr, sr, seed=5).samples
        spectrum = np.abs(np.fft.rfft(noise)) ** 2
        freqs = np.fft.rfftfreq(len(noise), 1.0 / sr)
        band = (freqs >= 100) & (freqs <= 4000)
        slope = np.polyfit(np.log2(freqs[band]), 10 * np.log10(spectrum[band]), 1)[0]
        self.assertTrue(-3.7 <= slope <= -2.3, f"Pink noise slope {slope:.2f} dB/octave")

    def test_babble_is_speech_band(self):
        sr = 16000
        noise = channel.make_noise(channel.NoiseKind.babble_proxy, 2 * sr, sr, seed=6).samples
        spectrum = np.abs(np.fft.rfft(noise)) ** 2
        freqs = np.fft.rfftfreq(len(noise), 1.0 / sr)
        in_band = spectrum[(freqs >= 250) & (freqs <= 3600)].sum()
        self.assertGreater(in_band / spectrum.sum(), 0.9)


class ResampleChainTest(unittest.TestCase):

    def test_same_rate(self):
        buf = AudioBuffer(np.random.default_rng(0).normal(scale=0.1, size=4000), 16000)
        out = channel.resample_chain(buf, 16000)
        self.assertLess(np.max(np.abs(out.samples - buf.samples)), 1e-3)

    def test_lengths(self):
        buf = AudioBuffer(np.random.default_rng(1).normal(scale=0.1, size=16001), 16000)
        for rate in channel.INTERMEDIATE_RATES:
            self.assertEqual(len(buf), len(channel.resample_chain(buf, rate)))

    def test_removes_high_band(self):
        sr = 16000
        buf = AudioBuffer(np.random.default_rng(2).normal(scale=0.1, size=sr), sr)
        out = channel.resample_chain(buf, 8000)
        freqs = np.fft.rfftfreq(sr, 1.0 / sr)
        high = freqs > 4200
        before = np.sum(np.abs(np.fft.rfft(buf.samples))[high] ** 2)
        after = np.sum(np.abs(np.fft.rfft(out.samples))[high] ** 2)
        self.assertGreaterEqual(10 * np.log10(before / after), 40.0)

    def test_deterministic(self):
        buf = AudioBuffer(np.random.default_rng(3).normal(scale=0.1, size=5000), 16000)
        np.testing.assert_array_equal(channel.resample_chain(buf, 11025).samples,
                                      channel.resample_chain(buf, 11025).samples)


class CodecProxyTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.corpus = gen_test_corpus(2, 2.0, seed=31)

    def test_parameters(self):
        high = channel.CodecParameters.for_bitrate(192)
        self.assertAlmostEqual(0.8, high.keep_fraction)
        self.assertAlmostEqual(7500.0, high.cutoff_hz)
        self.assertAlmostEqual(0.75, high.step_db)
        low = channel.CodecParameters.for_bitrate(64)
        self.assertAlmostEqual(0.3, low.keep_fraction)
        self.assertAlmostEqual(4000.0, low.cutoff_hz)
        self.assertAlmostEqual(2.0, low.step_db)
        with self.assertRaises(ValueError):
            channel.CodecParameters.for_bitrate(32)

    def test_lsd_decreases_with_bitrate(self):
        for buf in self.corpus:
            distances = [log_spectral_distance(buf, channel.codec_proxy(buf, bitrate, seed=1))
                         for bitrate in [64, 128, 192]]
            self.assertGreaterEqual(distances[0], distances[1])
            self.assertGreaterEqual(distances[1], distances[2])

    def test_bounded_output(self):
        buf = self.corpus[0]
        peak = np.max(np.abs(buf.samples))
        for bitrate in [64, 100, 192]:
            for dither in [False, True]:
                out = channel.codec_proxy(buf, bitrate, seed=3, dither=dither)
                self.assertEqual(len(buf), len(out))
                self.assertTrue(np.all(np.isfinite(out.samples)))
                self.assertLessEqual(np.max(np.abs(out.samples)), 2 * peak)

    def test_dither_is_seeded(self):
        buf = self.corpus[1]
        first = channel.codec_proxy(buf, 96, seed=8, dither=True)
        second = channel.codec_proxy(buf, 96, seed=8, dither=True)
        other = channel.codec_proxy(buf, 96, seed=9, dither=True)
        np.testing.assert_array_equal(first.samples, second.samples)
        self.assertFalse(np.array_equal(first.samples, other.samples))


class ApplyChannelTest(unittest.TestCase):

    def setUp(self):
        self.buf = gen_test_corpus(1, 2.0, seed=41)[0]

    def test_disabled_is_identity(self):
        out = channel.apply_channel(self.buf, channel.ChannelSpec(enabled=False), 0, 1)
        np.testing.assert_array_equal(self.buf.samples, out.samples)

    def test_reproducible(self):
        spec = channel.ChannelSpec()
        first = channel.apply_channel(self.buf, spec, 3, 1234)
        second = channel.apply_channel(self.buf, spec, 3, 1234)
        self.assertEqual(len(self.buf), len(first))
        np.testing.assert_array_equal(first.samples, second.samples)

    def test_draws_differ_between_utterances(self):
        spec = channel.ChannelSpec()
        draws = set()
        for index in range(100):
            stages = channel.draw_channel_stages(spec, index, 7)
            self.assertEqual(channel.StageKind.background_noise, stages[0].kind)
            self.assertTrue(10.0 <= stages[0].snr_db <= 30.0)
            self.assertEqual(channel.StageKind.codec_proxy, stages[-1].kind)
            self.assertTrue(64 <= stages[-1].bitrate_kbps <= 192)
            draws.add(repr([stage.to_dict() for stage in stages]))
        self.assertGreaterEqual(len(draws), 99)

    def test_pre_and_post_draws_differ(self):
        spec = channel.ChannelSpec()
        pre = channel.draw_channel_stages(spec, 0, 7, channel.Placement.pre_attack)
        post = channel.draw_channel_stages(spec, 0, 7, channel.Placement.post_attack)
        self.assertNotEqual([s.to_dict() for s in pre], [s.to_dict() for s in post])

    def test_fixed_stages(self):
        spec = channel.ChannelSpec.from_dict({"stages": [{"kind": "gaussian_noise", "snr_db": 20}]})
        out = channel.apply_channel(self.buf, spec, 0, 5)
        self.assertAlmostEqual(20.0, snr_db(self.buf.samples, out.samples), delta=0.01)

    def test_invalid_spec_paths(self):
        with self.assertRaises(ConfigException) as ctx:
            channel.ChannelSpec.from_dict({"snr_range": [5, 30]}, "channel")
        self.assertEqual("channel.snr_range", ctx.exception.path)
        with self.assertRaises(ConfigException) as ctx:
            channel.ChannelSpec.from_dict({"stages": [{"kind": "resample_chain", "intermediate_rate": 8000},
                                                      {"kind": "codec_proxy", "bitrate_kbps": 500}]}, "channel")
        self.assertEqual("channel.stages[1].bitrate_kbps", ctx.exception.path)
        with self.assertRaises(ConfigException):
            channel.ChannelSpec.from_dict({"stages": [{"kind": "reverb"}]})


if __name__ == '__main__':
    unittest.main()
