from .audio_types import *
from enum import Enum
from pathlib import Path
import io
import logging
import numpy as np
from scipy.io import wavfile

logger = logging.getLogger('pywmbench.audio_core.audio_io')

PCM16_SCALE = 32768.0


class WavEncoding(Enum):
    pcm16 = "pcm16"
    float32 = "float32"


def load_wav(wav_file) -> AudioBuffer:
    """
    Reads a wav file holding 16-bit PCM or 32-bit IEEE float samples in 1 or 2 channels.
    Stereo is averaged to mono, integer samples are scaled by 1/32768.

    :param wav_file: a path (str or Path), an io.BytesIO object or an opened binary file handle
    """
    try:
        sample_rate, data = wavfile.read(str(wav_file) if isinstance(wav_file, (str, Path)) else wav_file)
    except OSError as err:
        logger.error(f"Can't read file {wav_file}: {err}")
        raise WavReadException(f"Can't read wav file {wav_file}.") from err
    except ValueError as err:
        # scipy reports malformed headers and unknown format tags this way
        raise WavReadException(f"File is not a readable wav file: {err}") from err

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise UnsupportedEncodingException(f"Unsupported sample type {data.dtype}. Only 16-bit PCM and 32-bit "
                                           f"float are supported.")
    channels = 1 if samples.ndim == 1 else samples.shape[1]
    if channels not in [1, 2]:
        raise UnsupportedEncodingException(f"Unsupported channel count {channels}. Only mono and stereo "
                                           f"are supported.")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if len(samples) == 0:
        raise EmptyAudioException("The data chunk contains no samples.")
    if sample_rate <= 0:
        raise WavReadException(f"Invalid sample rate {sample_rate}.")
    if not np.all(np.isfinite(samples)):
        raise WavReadException("Float data chunk contains NaN or Inf values.")
    logger.debug(f"Read {len(samples)} samples at {sample_rate} Hz ({data.dtype}, {channels} channel(s)).")
    return AudioBuffer(samples, sample_rate)


def to_pcm16(samples: np.ndarray) -> np.ndarray:
    """scales by 32768, rounds half away from zero and clips to [-32768, 32767]"""
    scaled = np.asarray(samples, dtype=np.float64) * PCM16_SCALE
    rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return np.clip(rounded, -32768, 32767).astype(np.int16)


def save_wav(buf: AudioBuffer, wav_file, encoding: WavEncoding = WavEncoding.pcm16):
    """
    Writes buf as mono wav. pcm16 rounds half away from zero and clips to [-32768, 32767].

    :param buf: non-empty audio
    :param wav_file: a path (str or Path) or a writable binary file handle
    :param encoding: WavEncoding or its name
    """
    buf.require_samples(1)
    encoding = WavEncoding(encoding)
    data = to_pcm16(buf.samples) if encoding == WavEncoding.pcm16 else buf.samples.astype(np.float32)
    try:
        wavfile.write(str(wav_file) if isinstance(wav_file, (str, Path)) else wav_file, buf.sample_rate, data)
    except OSError as err:
        logger.error(f"Can't write file {wav_file}: {err}")
        raise WavWriteException(f"Can't write wav file {wav_file}.") from err
    logger.debug(f"Wrote {len(buf)} samples at {buf.sample_rate} Hz as {encoding.value}.")


def encode_wav(buf: AudioBuffer, encoding: WavEncoding = WavEncoding.pcm16) -> bytes:
    """the bytes save_wav would write"""
    stream = io.BytesIO()
    save_wav(buf, stream, encoding)
    return stream.getvalue()
