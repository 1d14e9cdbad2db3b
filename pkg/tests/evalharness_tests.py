import os
import json
import unittest
from pathlib import Path
import logging
import numpy as np
from pywmbench import evalharness
from pywmbench.audio_core import AudioBuffer, FrameSpec, estimate_f0, save_wav
from pywmbench.utils.errors import ConfigException

logger = logging.getLogger('pywmbench.evalharness')
logger.addHandler(logging.StreamHandler())
logger.setLevel(logging.WARNING)

cwd = os.getcwd()
if cwd.endswith("tests"):
    os.chdir(Path(cwd).parent)


def small_spec(**overrides):
    document = {
        "schema_version": 1,
        "corpus": {"count": 2, "duration_s": 2.0, "seed": 42},
        "schemes": ["dct_norm"],
        "attacks": ["none"],
        "channel": {"placements": ["off", "post_attack"]},
        "payload_len": 8,
        "global_seed": 7,
    }
    document.update(overrides)
    return evalharness.parse_experiment(document)


class CorpusTest(unittest.TestCase):

    def test_deterministic(self):
        first = evalharness.gen_test_corpus(3, 2.0, seed=42)
        second = evalharness.gen_test_corpus(3, 2.0, seed=42)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.samples, b.samples)
        self.assertFalse(np.array_equal(first[0].samples, first[1].samples))

    def test_speech_like(self):
        for buf in evalharness.gen_test_corpus(5, 4.0, seed=42):
            self.assertEqual(64000, len(buf))
            self.assertAlmostEqual(0.5, np.max(np.abs(buf.samples)), delta=1e-6)
            track = estimate_f0(buf, FrameSpec(1024, 256))
            self.assertGreaterEqual(track.voiced_fraction, 0.3)

    def test_reference_differs_from_utterance(self):
        utterance = evalharness.gen_test_corpus(1, 2.0, seed=3)[0]
        reference = evalharness.gen_reference(0, 2.0, seed=3)
        self.assertEqual(len(utterance), len(reference))
        self.assertFalse(np.array_equal(utterance.samples, reference.samples))
        np.testing.assert_array_equal(reference.samples, evalharness.gen_reference(0, 2.0, seed=3).samples)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            evalharness.gen_test_corpus(0)
        with self.assertRaises(ValueError):
            evalharness.gen_test_corpus(1, 1.5)


class ExperimentConfigTest(unittest.TestCase):

    def setUp(self):
        self.out_json = 'tests/files/experiment_out.json'
        self.out_yaml = 'tests/files/experiment_out.yml'

    def tearDown(self):
        for p in Path("tests/files").glob("*_out.*"):
            p.unlink()

    def test_defaults(self):
        spec = evalharness.parse_experiment({"schema_version": 1})
        self.assertEqual(["dct_norm", "spread_spectrum", "echo"], [s.name.value for s in spec.schemes])
        self.assertEqual(["none", "copy_synthesis", "self_vc"], [a.name.value for a in spec.attacks])
        self.assertEqual(["off", "post_attack"], [p.value for p in spec.placements])
        self.assertEqual(50, spec.corpus.count)
        self.assertEqual(42, spec.corpus.seed)
        self.assertEqual(8, spec.payload_len)
        self.assertEqual(4, spec.attacks[2].config.k)

    def test_schema_version(self):
        with self.assertRaises(ConfigException) as ctx:
            evalharness.parse_experiment({"payload_len": 8})
        self.assertEqual("schema_version", ctx.exception.path)
        with self.assertRaises(ConfigException) as ctx:
            evalharness.parse_experiment({"schema_version": 2})
        self.assertEqual("schema_version", ctx.exception.path)

    def test_error_paths(self):
        cases = [
            ({"schemes": ["echo", {"name": "dct_norm", "config": {"alpha": -1}}]}, "schemes[1].config.alpha"),
            ({"attacks": ["none", "rvc"]}, "attacks[1].name"),
            ({"attacks": [{"name": "self_vc", "config": {"k": 0}}]}, "attacks[0].config.k"),
            ({"channel": {"snr_range": [40, 10]}}, "channel.snr_range"),
            ({"channel": {"placements": ["sideways"]}}, "channel.placements[0]"),
            ({"corpus": {"count": 0}}, "corpus.count"),
            ({"payload_len": 300}, "payload_len"),
            ({"corpus": {"duration_s": 2.0}, "payload_len": 32}, "corpus.duration_s"),
        ]
        for overrides, path in cases:
            document = dict({"schema_version": 1}, **overrides)
            with self.assertRaises(ConfigException, msg=str(overrides)) as ctx:
                evalharness.parse_experiment(document)
            self.assertEqual(path, ctx.exception.path)

    def test_single_placement_and_paths(self):
        spec = evalharness.parse_experiment({"schema_version": 1, "channel": {"placements": "both"},
                                             "corpus": ["a.wav", "b.wav"]})
        self.assertEqual([evalharness.Placement.both], spec.placements)
        self.assertFalse(spec.corpus.is_synthetic)
        self.assertEqual(("a.wav", "b.wav"), spec.corpus.paths)

    def test_load_json_and_yaml(self):
        document = {"schema_version": 1, "schemes": ["echo"], "attacks": ["none", "copy_synthesis_linear"],
                    "global_seed": 3}
        with open(self.out_json, 'w') as stream:
            json.dump(document, stream)
        with open(self.out_yaml, 'w') as stream:
            stream.write("schema_version: 1\nschemes: [echo]\nattacks: [none, copy_synthesis_linear]\nglobal_seed: 3\n")
        from_json = evalharness.load_experiment(self.out_json)
        from_yaml = evalharness.load_experiment(self.out_yaml)
        self.assertEqual(from_json.to_dict(), from_yaml.to_dict())
        self.assertEqual(3, from_json.global_seed)
        self.assertEqual(evalharness.AttackName.copy_synthesis_linear, from_json.attacks[1].name)

    def test_malformed_file(self):
        with open(self.out_json, 'w') as stream:
            stream.write('{"schema_version": 1, "schemes": [')
        with self.assertRaises(ConfigException):
            evalharness.load_experiment(self.out_json)

    def test_round_trip_dict(self):
        spec = small_spec()
        self.assertEqual(spec.to_dict(), evalharness.parse_experiment(spec.to_dict()).to_dict())


class RunExperimentTest(unittest.TestCase):

    def setUp(self):
        self.out_csv = 'tests/files/report_out.csv'
        self.out_csv_2 = 'tests/files/report_2_out.csv'
        self.out_json = 'tests/files/report_out.json'
        self.out_md = 'tests/files/report_out.md'

    def tearDown(self):
        for p in Path("tests/files").glob("*_out.*"):
            p.unlink()

    def test_clean_round_trip(self):
        report = evalharness.run_experiment(small_spec())
        self.assertEqual(4, len(report.rows))
        self.assertEqual([], report.error_rows)
        for row in report.rows:
            self.assertEqual(1.0 - row.bit_accuracy, row.attacker_perf)
            self.assertEqual(2, len(row.payload_hex))
        self.assertLessEqual(report.mean("attacker_perf", "dct_norm", "none", "off"), 0.03)
        channel_rows = [row for row in report.rows if row.channel_placement == "post_attack"]
        for row in channel_rows:
            self.assertIn(len(row.channel_draws), (2, 3))
            self.assertEqual("background_noise", row.channel_draws[0]["kind"])
            self.assertEqual("codec_proxy", row.channel_draws[-1]["kind"])
        self.assertTrue(all(row.channel_draws == [] for row in report.rows if row.channel_placement == "off"))

    def test_aggregates_recomputable(self):
        report = evalharness.run_experiment(small_spec())
        for agg in report.aggregates:
            rows = [row for row in report.rows if row.cell == (agg["scheme"], agg["attack"], agg["channel_placement"])]
            self.assertEqual(len(rows), agg["count"])
            values = np.array([row.attacker_perf for row in rows])
            self.assertAlmostEqual(np.mean(values), agg["attacker_perf_mean"], delta=1e-9)
            self.assertAlmostEqual(np.std(values), agg["attacker_perf_std"], delta=1e-9)
            mcd = np.array([row.quality.mcd_db for row in rows])
            self.assertAlmostEqual(np.mean(mcd), agg["mcd_db_mean"], delta=1e-9)

    def test_csv_is_reproducible(self):
        evalharness.write_report(evalharness.run_experiment(small_spec()), "csv", self.out_csv)
        evalharness.write_report(evalharness.run_experiment(small_spec(workers=2)), "csv", self.out_csv_2)
        self.assertEqual(Path(self.out_csv).read_bytes(), Path(self.out_csv_2).read_bytes())

    def test_report_formats(self):
        report = evalharness.run_experiment(small_spec())
        evalharness.write_report(report, "csv", self.out_csv)
        with open(self.out_csv) as stream:
            lines = [line for line in stream.read().splitlines() if line]
        self.assertEqual(len(report.successful_rows) + 1, len(lines))
        self.assertTrue(lines[0].startswith("scheme,attack,channel_placement,utterance_id"))

        evalharness.write_report(report, "json", self.out_json)
        with open(self.out_json) as stream:
            parsed = json.load(stream)
        self.assertEqual(parsed, evalharness.read_json_report(self.out_json).to_dict())
        self.assertEqual(7, parsed["global_seed"])

        evalharness.write_report(report, "markdown", self.out_md)
        text = Path(self.out_md).read_text(encoding='utf-8')
        self.assertIn("| attack | channel | dct_norm |", text)
        self.assertIn("| none | post_attack |", text)

    def test_attacks(self):
        spec = small_spec(corpus={"count": 1, "duration_s": 2.0, "reference_duration_s": 2.0},
                          schemes=["spread_spectrum"],
                          attacks=[{"name": "copy_synthesis", "config": {"gl_iterations": 5}},
                                   {"name": "copy_synthesis_linear", "config": {"gl_iterations": 5}},
                                   {"name": "self_vc", "config": {"gl_iterations": 5}}],
                          channel={"placements": ["off"]})
        report = evalharness.run_experiment(spec)
        self.assertEqual(3, len(report.rows))
        self.assertEqual([], report.error_rows)
        for row in report.rows:
            self.assertTrue(0.0 <= row.attacker_perf <= 1.0)
            self.assertTrue(np.isfinite(row.quality.lsd_db))

    def test_error_rows(self):
        short = 'tests/files/short_out.wav'
        save_wav(AudioBuffer(np.random.default_rng(0).normal(scale=0.1, size=16000), 16000), short)
        spec = small_spec(corpus={"paths": [short]}, attacks=["none", "copy_synthesis"])
        report = evalharness.run_experiment(spec)
        self.assertEqual(4, len(report.rows))
        self.assertEqual(4, len(report.error_rows))
        self.assertTrue(report.rows[0].error.startswith("InsufficientAudioException"))
        self.assertEqual([], report.aggregates)
        with self.assertRaises(evalharness.EmptyReportException):
            evalharness.write_report(report, "csv", self.out_csv)
        self.assertFalse(Path(self.out_csv).exists())


def chance_tolerance(num_bits: int) -> float:
    """half-width of the band around 0.5 that a coin-flip decoder stays in (3 sigma, at least 0.05)"""
    return max(0.05, 3.0 * 0.5 / np.sqrt(num_bits))


class AcceptanceTest(unittest.TestCase):
    """default schemes, attacks and channel on a small synthetic corpus"""

    @classmethod
    def setUpClass(cls):
        cls.spec = evalharness.parse_experiment({
            "schema_version": 1,
            "corpus": {"count": 10, "duration_s": 4.0, "seed": 42},
            "workers": 2,
        })
        cls.report = evalharness.run_experiment(cls.spec)
        cls.schemes = [entry.name.value for entry in cls.spec.schemes]
        cls.num_bits = cls.spec.corpus.count * cls.spec.payload_len

    def perf(self, scheme, attack, placement="off"):
        return self.report.mean("attacker_perf", scheme, attack, placement)

    def test_no_errors(self):
        self.assertEqual([], self.report.error_rows)
        self.assertEqual(10 * 3 * 3 * 2, len(self.report.rows))

    def test_clean_round_trip(self):
        for scheme in self.schemes:
            limit = 0.05 if scheme == "echo" else 0.03
            self.assertLessEqual(self.perf(scheme, "none"), limit, scheme)
        for row in self.report.rows:
            if row.attack == "none" and row.channel_placement == "off":
                self.assertGreaterEqual(row.embedding_snr_db, 25.0, row.scheme)

    def test_channel_degrades(self):
        for scheme in self.schemes:
            self.assertGreater(self.perf(scheme, "none", "post_attack"), self.perf(scheme, "none"), scheme)
        self.assertLess(self.perf("spread_spectrum", "none", "post_attack"), 0.45)

    def test_self_vc_at_chance(self):
        tolerance = chance_tolerance(self.num_bits)
        for scheme in self.schemes:
            self.assertLessEqual(abs(self.perf(scheme, "self_vc") - 0.5), tolerance, scheme)

    def test_self_vc_quality(self):
        for scheme in self.schemes:
            self.assertLess(self.report.mean("mcd_db", scheme, "self_vc"), 8.0)
            self.assertGreater(self.report.mean("f0_corr", scheme, "self_vc"), 0.8)
            self.assertLess(self.report.mean("lsd_db", scheme, "self_vc"), 6.0)

    def test_echo_ordering(self):
        # the difference of two chance-level means has sqrt(2) times the spread of one
        tolerance = np.sqrt(2.0) * chance_tolerance(self.num_bits)
        self.assertGreaterEqual(self.perf("echo", "copy_synthesis"), self.perf("echo", "none") + 0.2)
        self.assertGreaterEqual(self.perf("echo", "self_vc"), self.perf("echo", "copy_synthesis") - tolerance)


if __name__ == '__main__':
    unittest.main()
