from .channel_types import *
from .noise import make_noise, add_noise_at_snr, load_noise_excerpt
from .distortions import resample_chain, codec_proxy
from ..audio_core import AudioBuffer
from ..utils.seeding import hash64
import logging
from pathlib import Path
import numpy as np

logger = logging.getLogger('pywmbench.channel.channel')

STAGE_SEED_LIMIT = 2 ** 63


def channel_rng(global_seed: int, utterance_index: int, placement: Placement = Placement.post_attack):
    """
    Per-utterance generator seeded by hash64(global_seed, utterance_index). The channel in front of the
    attacker gets its own stream so pre and post draws differ.
    """
    if Placement(placement) == Placement.pre_attack:
        return np.random.default_rng(hash64(global_seed, utterance_index, Placement.pre_attack.value))
    return np.random.default_rng(hash64(global_seed, utterance_index))


def _noise_files(spec: ChannelSpec) -> list:
    if spec.noise_dir is None:
        return []
    files = sorted(str(p) for p in Path(spec.noise_dir).glob("*.wav"))
    if not files:
        raise ChannelException(f"Noise directory {spec.noise_dir} contains no wav files.")
    return files


def draw_channel_stages(spec: ChannelSpec, utterance_index: int, global_seed: int,
                        placement: Placement = Placement.post_attack) -> list:
    """
    Concrete, fully seeded stages for one utterance. The result is what gets logged in the report.
    """
    rng = channel_rng(global_seed, utterance_index, placement)
    if not spec.random_compound:
        return [stage if stage.seed is not None else stage.with_seed(int(rng.integers(STAGE_SEED_LIMIT)))
                for stage in spec.stages]

    stages = []
    noise_files = _noise_files(spec)
    snr = float(rng.uniform(*spec.snr_range))
    noise_seed = int(rng.integers(STAGE_SEED_LIMIT))
    if noise_files:
        noise_file = noise_files[int(rng.integers(len(noise_files)))]
        stages.append(ChannelStage(StageKind.background_noise, snr_db=snr, noise_file=noise_file, seed=noise_seed))
    else:
        kind = spec.noise_kinds[int(rng.integers(len(spec.noise_kinds)))]
        stages.append(ChannelStage(StageKind.background_noise, snr_db=snr, noise_kind=kind, seed=noise_seed))
    if rng.random() < spec.resample_probability:
        rate = spec.intermediate_rates[int(rng.integers(len(spec.intermediate_rates)))]
        stages.append(ChannelStage(StageKind.resample_chain, intermediate_rate=rate))
    bitrate = int(rng.integers(spec.bitrate_range[0], spec.bitrate_range[1] + 1))
    stages.append(ChannelStage(StageKind.codec_proxy, bitrate_kbps=bitrate, seed=int(rng.integers(STAGE_SEED_LIMIT))))
    logger.debug(f"Utterance {utterance_index} ({Placement(placement).value}): "
                 f"{[stage.to_dict() for stage in stages]}")
    return stages


def apply_stage(buf: AudioBuffer, stage: ChannelStage, dither: bool = False) -> AudioBuffer:
    seed = stage.seed if stage.seed is not None else 0
    if stage.kind in (StageKind.gaussian_noise, StageKind.background_noise):
        if stage.noise_file is not None:
            noise = load_noise_excerpt(stage.noise_file, len(buf), buf.sample_rate, np.random.default_rng(seed))
        else:
            noise = make_noise(stage.noise_kind, len(buf), buf.sample_rate, seed)
        return add_noise_at_snr(buf, noise, stage.snr_db)
    if stage.kind == StageKind.resample_chain:
        return resample_chain(buf, stage.intermediate_rate)
    return codec_proxy(buf, stage.bitrate_kbps, seed, dither)


def apply_stages(buf: AudioBuffer, stages: list, dither: bool = False) -> AudioBuffer:
    """noise, resampling and codec stages in the given order"""
    out = buf
    for stage in stages:
        out = apply_stage(out, stage, dither)
    return out


def apply_channel(buf: AudioBuffer, spec: ChannelSpec, utterance_index: int, global_seed: int,
                  placement: Placement = Placement.post_attack) -> AudioBuffer:
    """
    Pure function of (audio, spec, utterance_index, global_seed, placement). A disabled spec is the
    identity.
    """
    if not spec.enabled:
        return buf.with_samples(buf.samples.copy())
    return apply_stages(buf, draw_channel_stages(spec, utterance_index, global_seed, placement), spec.codec_dither)
