from .experiment_types import *
from .corpus import gen_test_corpus, gen_reference, load_corpus, list_wav_files
from .report import aggregate_rows
from .. import __version__
from ..audio_core import AudioBuffer
from ..channel import Placement, draw_channel_stages, apply_stages
from ..selfvc import PoolMode, self_vc_attack, copy_synthesis_attack, quality_report
from ..watermark import Payload, WatermarkKey, get_watermarker, bitwise_accuracy, embedding_snr
from ..utils.seeding import derive_rng, hash64
from concurrent.futures import ProcessPoolExecutor
import dataclasses
import logging
from pathlib import Path

logger = logging.getLogger('pywmbench.evalharness.experiment')

# failures that become error rows instead of aborting the run
RECOVERABLE = (PywmbenchException, ValueError)


def apply_attack(buf: AudioBuffer, attack: AttackEntry, reference: AudioBuffer = None, seed: int = 0) -> AudioBuffer:
    if attack.name == AttackName.none:
        return buf.with_samples(buf.samples.copy())
    if attack.name == AttackName.self_vc:
        return self_vc_attack(buf, reference, attack.config, seed)
    return copy_synthesis_attack(buf, attack.config.gl_iterations, seed, attack.name.representation)


class Utterance(object):

    def __init__(self, index: int, utterance_id: str, audio: AudioBuffer, reference: AudioBuffer = None):
        self.index = index
        self.utterance_id = utterance_id
        self.audio = audio
        self.reference = reference


class ExperimentRunner(object):
    """
    Runs the publisher -> channel -> attacker -> channel -> detector grid of an ExperimentSpec. Every
    random draw is derived from (global_seed, utterance index, grid cell), so a run is reproducible and
    independent of the number of workers.
    """

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec

    def needs_reference(self) -> bool:
        return any(attack.name == AttackName.self_vc and attack.config.pool_mode == PoolMode.separate_reference
                   for attack in self.spec.attacks)

    def load_utterances(self) -> list:
        corpus = self.spec.corpus
        if corpus.is_synthetic:
            audio = gen_test_corpus(corpus.count, corpus.duration_s, corpus.seed)
            utterances = []
            for index, buf in enumerate(audio):
                reference = None
                if self.needs_reference():
                    reference = gen_reference(index, corpus.reference_duration_s, corpus.seed)
                utterances.append(Utterance(index, f"utt_{index:04d}", buf, reference))
            return utterances

        try:
            paths = [Path(p) for p in corpus.paths] if corpus.paths is not None else list_wav_files(corpus.directory)
        except FileNotFoundError as err:
            logger.error(f"Corpus directory {corpus.directory} holds no wav files.")
            raise ExperimentException(str(err)) from err
        audio = load_corpus(paths)
        for path, buf in zip(paths, audio):
            if len(buf) < self.spec.min_samples:
                logger.warning(f"{path} has {len(buf)} samples, {self.spec.min_samples} are needed for "
                               f"{self.spec.payload_len} bits. Its rows will be errors.")
        return [Utterance(index, path.stem, buf) for index, (path, buf) in enumerate(zip(paths, audio))]

    def run(self) -> EvalReport:
        utterances = self.load_utterances()
        logger.info(f"Running {self.spec.num_cells} grid cells on {len(utterances)} utterances with "
                    f"{self.spec.workers} worker(s).")
        if self.spec.workers > 1 and len(utterances) > 1:
            with ProcessPoolExecutor(max_workers=self.spec.workers) as executor:
                results = list(executor.map(evaluate_utterance, [self.spec] * len(utterances), utterances))
        else:
            results = [evaluate_utterance(self.spec, utterance) for utterance in utterances]

        rows = [row for utterance_rows in results for row in utterance_rows]
        aggregates = aggregate_rows(rows)
        if not aggregates:
            logger.error(f"All {len(rows)} rows of the experiment failed.")
        report = EvalReport(rows, aggregates, self.spec.to_dict(), __version__, self.spec.global_seed)
        logger.info(f"Experiment finished: {len(report.successful_rows)} rows, {len(report.error_rows)} errors.")
        return report


def run_experiment(spec: ExperimentSpec) -> EvalReport:
    return ExperimentRunner(spec).run()


def _error_row(scheme: str, attack: str, placement: str, utterance: Utterance, err: Exception) -> EvalRow:
    return EvalRow(scheme, attack, placement, utterance.utterance_id, error=f"{type(err).__name__}: {err}")


def evaluate_utterance(spec: ExperimentSpec, utterance: Utterance) -> list:
    """
    All grid cells of one utterance, ordered by scheme, attack and placement. One key and payload per
    (utterance, scheme) is shared by all attacks and placements.
    """
    rows = []
    for scheme in spec.schemes:
        scheme_name = scheme.name.value
        marker = get_watermarker(scheme_name, scheme.config)
        key = WatermarkKey(hash64("watermark_key", spec.global_seed, utterance.index, scheme_name))
        payload = Payload.random(spec.payload_len, derive_rng("payload", spec.global_seed, utterance.index,
                                                              scheme_name))
        try:
            marked = marker.embed(utterance.audio, payload, key)
            snr = embedding_snr(utterance.audio, marked)
        except RECOVERABLE as err:
            logger.warning(f"{utterance.utterance_id}: embedding {scheme_name} failed: {err}")
            rows.extend(_error_row(scheme_name, attack.name.value, placement.value, utterance, err)
                        for attack in spec.attacks for placement in spec.placements)
            continue

        for attack_index, attack in enumerate(spec.attacks):
            for placement in spec.placements:
                try:
                    rows.append(evaluate_cell(spec, utterance, marker, key, payload, marked, snr, attack_index,
                                              placement))
                except RECOVERABLE as err:
                    logger.warning(f"{utterance.utterance_id}: {scheme_name} / {attack.name.value} / "
                                   f"{placement.value} failed: {err}")
                    rows.append(_error_row(scheme_name, attack.name.value, placement.value, utterance, err))
    logger.info(f"Finished utterance {utterance.utterance_id}.")
    return rows


def evaluate_cell(spec: ExperimentSpec, utterance: Utterance, marker, key: WatermarkKey, payload: Payload,
                  marked: AudioBuffer, snr: float, attack_index: int, placement: Placement) -> EvalRow:
    scheme_name = marker.name
    attack = spec.attacks[attack_index]
    channel = spec.channel
    draws = []
    signal = marked

    if placement.before_attack and channel.enabled:
        stages = draw_channel_stages(channel, utterance.index, spec.global_seed, Placement.pre_attack)
        signal = apply_stages(signal, stages, channel.codec_dither)
        draws += [dict(stage.to_dict(), placement=Placement.pre_attack.value) for stage in stages]

    reference = utterance.reference
    attack_entry = attack
    if attack.name == AttackName.self_vc and attack.config.pool_mode == PoolMode.separate_reference \
            and reference is None:
        logger.warning(f"{utterance.utterance_id}: no same-speaker reference, self-VC matches against the "
                       f"utterance itself with an exclusion window.")
        attack_entry = AttackEntry(attack.name, dataclasses.replace(attack.config,
                                                                    pool_mode=PoolMode.same_utterance_excluded))
    attack_seed = hash64("attack", spec.global_seed, utterance.index, scheme_name, attack_index)
    signal = apply_attack(signal, attack_entry, reference, attack_seed)

    if placement.after_attack and channel.enabled:
        stages = draw_channel_stages(channel, utterance.index, spec.global_seed, Placement.post_attack)
        signal = apply_stages(signal, stages, channel.codec_dither)
        draws += [dict(stage.to_dict(), placement=Placement.post_attack.value) for stage in stages]

    result = marker.detect(signal, key, payload.length)
    accuracy = bitwise_accuracy(payload, result.bits)
    # the attacker receives the watermarked signal, so quality is measured against it
    quality = quality_report(marked, signal)
    return EvalRow(scheme_name, attack.name.value, placement.value, utterance.utterance_id,
                   bit_accuracy=accuracy, quality=quality, channel_draws=draws, payload_hex=payload.to_hex(),
                   embedding_snr_db=snr)
