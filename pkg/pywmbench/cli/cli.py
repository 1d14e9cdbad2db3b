import argparse
import json
import logging
from pathlib import Path
import sys
import yaml

from .. import __version__
from ..audio_core import WavEncoding, load_wav, save_wav, to_canonical_rate
from ..channel import ChannelSpec, draw_channel_stages, apply_stages
from ..evalharness import (ReportFormat, gen_test_corpus, gen_reference, load_experiment, run_experiment,
                           write_report)
from ..selfvc import (SelfVcConfig, PoolMode, Representation, copy_synthesis_attack,
                      quality_report, self_vc_attack)
from ..watermark import (Payload, PayloadException, SchemeRegistry, WatermarkKey, bitwise_accuracy,
                         attacker_performance, embedding_snr, get_watermarker)
from ..utils.errors import PywmbenchException, ConfigException
from ..utils.seeding import MAX_SEED

logger = logging.getLogger('pywmbench.cli.cli')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageException(PywmbenchException):
    pass


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so that usage errors map to exit code 1."""

    def error(self, message):
        raise UsageException(f"{self.prog}: {message}")


def key_seed(text: str) -> int:
    """decimal or 0x-prefixed hexadecimal key"""
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer key")
    if not 0 <= value < MAX_SEED:
        raise argparse.ArgumentTypeError(f"key {value} is not a 64-bit unsigned integer")
    return value


def read_mapping(path) -> dict:
    """JSON or YAML file holding one mapping"""
    if path is None:
        return {}
    with open(path, 'r', encoding='utf-8') as stream:
        try:
            data = yaml.safe_load(stream)
        except yaml.YAMLError as err:
            raise ConfigException(f"malformed document {path}: {err}", "") from err
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigException(f"{path} must hold a mapping but holds {type(data).__name__}", "")
    return data


def emit(**values):
    """one key=value line per entry"""
    for key, value in values.items():
        print(f"{key}={value}")


def _format(value, digits: int) -> str:
    return "none" if value is None else f"{value:.{digits}f}"


def emit_quality(report):
    emit(mcd_db=_format(report.mcd_db, 3), lsd_db=_format(report.lsd_db, 3), f0_corr=_format(report.f0_corr, 3),
         voiced_overlap=_format(report.voiced_overlap, 3), snr_db=_format(report.snr_db, 2),
         speaker_sim=_format(report.speaker_sim, 3))


def _watermarker(args):
    config = SchemeRegistry.build_config(args.scheme, read_mapping(args.config), "config")
    return get_watermarker(args.scheme, config)


def cmd_embed(args) -> int:
    payload = Payload.from_hex(args.payload_hex, args.bits)
    key = WatermarkKey(args.key)
    marker = _watermarker(args)
    buf = to_canonical_rate(load_wav(args.input))
    marked = marker.embed(buf, payload, key)
    save_wav(marked, args.output, args.encoding)
    emit(scheme=args.scheme, bits=payload.length, payload=payload.to_hex(), samples=len(marked),
         embedding_snr_db=_format(embedding_snr(buf, marked), 2))
    return EXIT_OK


def cmd_detect(args) -> int:
    expected = Payload.from_hex(args.expected_hex, args.bits) if args.expected_hex is not None else None
    key = WatermarkKey(args.key)
    marker = _watermarker(args)
    buf = to_canonical_rate(load_wav(args.input))
    result = marker.detect(buf, key, args.bits)
    emit(scheme=args.scheme, payload=result.bits.to_hex(),
         soft_scores=",".join(f"{score:.4f}" for score in result.soft_scores), erasures=result.num_erasures)
    if expected is not None:
        accuracy = bitwise_accuracy(expected, result.bits)
        emit(bit_accuracy=f"{accuracy:.3f}", attacker_perf=f"{attacker_performance(accuracy):.3f}")
    return EXIT_OK


def _selfvc_config(args) -> SelfVcConfig:
    settings = read_mapping(args.config)
    for name in ["k", "pool_mode", "distance", "resynth", "exclusion_window", "gl_iterations", "pitch_weight"]:
        value = getattr(args, name)
        if value is not None:
            settings[name] = value
    return SelfVcConfig.from_dict(settings, "config")


def cmd_attack(args) -> int:
    if args.type == "selfvc":
        cfg = _selfvc_config(args)
        if cfg.pool_mode == PoolMode.separate_reference and args.reference is None:
            raise UsageException("selfvc in separate_reference mode needs --reference (or use "
                                 "--pool-mode same_utterance_excluded).")
        buf = to_canonical_rate(load_wav(args.input))
        reference = load_wav(args.reference) if args.reference is not None else None
        attacked = self_vc_attack(buf, reference, cfg, args.seed)
    else:
        gl_iterations = args.gl_iterations if args.gl_iterations is not None else 60
        if gl_iterations < 1:
            raise UsageException(f"--gl-iterations must be at least 1 but is {gl_iterations}")
        buf = to_canonical_rate(load_wav(args.input))
        attacked = copy_synthesis_attack(buf, gl_iterations, args.seed, args.representation)
    save_wav(attacked, args.output, args.encoding)
    emit(attack=args.type, samples=len(attacked))
    emit_quality(quality_report(buf, attacked))
    return EXIT_OK


def cmd_channel(args) -> int:
    settings = read_mapping(args.config)
    if args.snr_range is not None:
        settings["snr_range"] = args.snr_range
    if args.bitrate_range is not None:
        settings["bitrate_range"] = args.bitrate_range
    spec = ChannelSpec.from_dict(settings, "config")
    buf = to_canonical_rate(load_wav(args.input))
    stages = draw_channel_stages(spec, args.index, args.seed) if spec.enabled else []
    out = apply_stages(buf, stages, spec.codec_dither)
    save_wav(out, args.output, args.encoding)
    emit(stages=len(stages))
    for idx, stage in enumerate(stages):
        emit(**{f"stage_{idx}": json.dumps(stage.to_dict(), sort_keys=True, separators=(',', ':'))})
    return EXIT_OK


def cmd_evaluate(args) -> int:
    spec = load_experiment(args.config)
    if args.workers is not None:
        if args.workers < 1:
            raise UsageException(f"--workers must be at least 1 but is {args.workers}")
        spec.workers = args.workers
    formats = [ReportFormat(f) for f in (args.format or ["csv", "markdown"])]
    out_dir = Path(args.out)
    report = run_experiment(spec)
    out_dir.mkdir(parents=True, exist_ok=True)
    emit(rows=len(report.successful_rows), errors=len(report.error_rows))
    for report_format in formats:
        path = write_report(report, report_format, out_dir / f"report{report_format.suffix}")
        emit(**{f"report_{report_format.value}": path})
    for agg in report.aggregates:
        cell = f"{agg['scheme']}.{agg['attack']}.{agg['channel_placement']}"
        emit(**{f"{cell}.attacker_perf": _format(agg["attacker_perf_mean"], 3)})
    return EXIT_OK


def cmd_gen_testset(args) -> int:
    if args.count < 1:
        raise UsageException(f"--count must be at least 1 but is {args.count}")
    if args.duration < 2.0:
        raise UsageException(f"--duration must be at least 2 s but is {args.duration}")
    corpus = gen_test_corpus(args.count, args.duration, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for index, buf in enumerate(corpus):
        save_wav(buf, out_dir / f"utt_{index:04d}.wav", args.encoding)
        if args.references:
            save_wav(gen_reference(index, args.duration, args.seed), out_dir / f"ref_{index:04d}.wav", args.encoding)
    emit(files=len(corpus), out=out_dir)
    return EXIT_OK


def _add_io(parser, output: bool = True):
    parser.add_argument("input", help="input wav file")
    if output:
        parser.add_argument("output", help="output wav file")
        parser.add_argument("--encoding", choices=[e.value for e in WavEncoding], default="pcm16",
                            help="sample format of the written file")


def _add_scheme(parser):
    parser.add_argument("--scheme", choices=SchemeRegistry.names(), default="dct_norm")
    parser.add_argument("--key", type=key_seed, required=True, help="watermark key, 64-bit unsigned integer")
    parser.add_argument("--bits", type=int, default=32, help="payload length in bits")
    parser.add_argument("--config", help="JSON or YAML file overriding the scheme preset")


def build_parser() -> CliParser:
    parser = CliParser(prog="pywmbench", description="Audio watermark robustness lab.")
    parser.add_argument("--version", action="version", version=f"pywmbench {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug output")
    subparsers = parser.add_subparsers(dest="command", required=True)

    embed = subparsers.add_parser("embed", help="embed a payload into a wav file")
    _add_io(embed)
    _add_scheme(embed)
    embed.add_argument("--payload-hex", required=True, help="payload, most significant bit first")
    embed.set_defaults(handler=cmd_embed)

    detect = subparsers.add_parser("detect", help="decode the payload of a wav file")
    _add_io(detect, output=False)
    _add_scheme(detect)
    detect.add_argument("--expected-hex", help="payload to compare against")
    detect.set_defaults(handler=cmd_detect)

    attack = subparsers.add_parser("attack", help="self voice conversion or copy synthesis")
    _add_io(attack)
    attack.add_argument("--type", choices=["selfvc", "copysyn"], required=True)
    attack.add_argument("--reference", help="same-speaker recording used as the matching pool")
    attack.add_argument("--seed", type=int, default=0, help="Griffin-Lim initial phase seed")
    attack.add_argument("--config", help="JSON or YAML file with self-VC settings")
    attack.add_argument("--k", type=int)
    attack.add_argument("--pool-mode", choices=[m.value for m in PoolMode])
    attack.add_argument("--distance", choices=["cosine", "l2"])
    attack.add_argument("--resynth", choices=["griffin_lim", "unit_ola"])
    attack.add_argument("--exclusion-window", type=int)
    attack.add_argument("--gl-iterations", type=int)
    attack.add_argument("--pitch-weight", type=float)
    attack.add_argument("--representation", choices=[r.value for r in Representation], default="mel",
                        help="copy synthesis from the linear or the mel spectrogram")
    attack.set_defaults(handler=cmd_attack)

    channel = subparsers.add_parser("channel", help="apply seeded transmission distortions")
    _add_io(channel)
    channel.add_argument("--seed", type=int, default=0, help="global seed")
    channel.add_argument("--index", type=int, default=0, help="utterance index")
    channel.add_argument("--config", help="JSON or YAML file with channel settings")
    channel.add_argument("--snr-range", type=float, nargs=2, metavar=("LO", "HI"))
    channel.add_argument("--bitrate-range", type=int, nargs=2, metavar=("LO", "HI"))
    channel.set_defaults(handler=cmd_channel)

    evaluate = subparsers.add_parser("evaluate", help="run an experiment grid")
    evaluate.add_argument("--config", required=True, help="experiment file, JSON or YAML")
    evaluate.add_argument("--out", required=True, help="report directory")
    evaluate.add_argument("--format", action="append", choices=[f.value for f in ReportFormat],
                          help="report format, repeatable (default csv and markdown)")
    evaluate.add_argument("--workers", type=int, help="worker processes, overrides the experiment file")
    evaluate.set_defaults(handler=cmd_evaluate)

    testset = subparsers.add_parser("gen-testset", help="write a synthetic speech-like corpus")
    testset.add_argument("--count", type=int, default=50)
    testset.add_argument("--duration", type=float, default=4.0, help="seconds per utterance")
    testset.add_argument("--seed", type=int, default=42)
    testset.add_argument("--out", required=True, help="output directory")
    testset.add_argument("--references", action="store_true", help="also write same-voice references ref_0000.wav ...")
    testset.add_argument("--encoding", choices=[e.value for e in WavEncoding], default="pcm16")
    testset.set_defaults(handler=cmd_gen_testset)
    return parser


def configure_logging(verbosity: int):
    package_logger = logging.getLogger('pywmbench')
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    package_logger.setLevel(level)
    if not any(getattr(h, "_pywmbench_cli", False) for h in package_logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._pywmbench_cli = True
        package_logger.addHandler(handler)


def main(argv=None) -> int:
    """
    Exit codes: 0 success, 1 usage error (bad flags, payload or config, missing
    --reference), 2 runtime error (including a reference that is too short).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageException as err:
        print(str(err), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as err:
        # --help and --version
        return err.code if isinstance(err.code, int) else EXIT_OK

    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except (UsageException, PayloadException, ConfigException) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (PywmbenchException, OSError) as err:
        logger.debug("Command failed.", exc_info=True)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
