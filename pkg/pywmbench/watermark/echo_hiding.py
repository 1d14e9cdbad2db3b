from .watermark_types import *
from .blocks import BlockWatermarker, block_assignment
from ..audio_core import AudioBuffer
from ..utils.signal_math import edge_taper
import logging
import numpy as np
from scipy import fft
from scipy import signal

logger = logging.getLogger('pywmbench.watermark.echo_hiding')

SILENT_ENERGY = 1e-12
LOG_FLOOR = 1e-12
HIGHPASS_ORDER = 4


def real_cepstrum(frame: np.ndarray, lo_bin: int = 0) -> np.ndarray:
    """
    inverse FFT of the log magnitude spectrum. Log magnitudes below lo_bin are replaced by the mean
    of the remaining bins, which keeps only the cepstral structure of the upper band.
    """
    log_spectrum = np.log(np.maximum(np.abs(fft.rfft(frame)), LOG_FLOOR))
    if 0 < lo_bin < len(log_spectrum):
        log_spectrum[:lo_bin] = log_spectrum[lo_bin:].mean()
    return fft.irfft(log_spectrum, n=len(frame))


def cepstral_prominence(cepstrum: np.ndarray, lag: int) -> float:
    """value at lag minus the mean of the two neighbours on each side"""
    neighbours = cepstrum[[lag - 2, lag - 1, lag + 1, lag + 2]]
    return float(cepstrum[lag] - neighbours.mean())


def block_cepstrum(block: np.ndarray, lo_bin: int = 0) -> np.ndarray:
    """
    Mean real cepstrum of three Hann-windowed half-block sub-frames at quarter-block hop.
    """
    sub_len = len(block) // 2
    hop = len(block) // 4
    window = signal.get_window('hann', sub_len, fftbins=True)
    cepstra = [real_cepstrum(block[start:start + sub_len] * window, lo_bin) for start in range(0, 3 * hop, hop)]
    return np.mean(cepstra, axis=0)


def echo_source(x: np.ndarray, highpass_hz: float, sample_rate: int) -> np.ndarray:
    """zero-phase high-pass of x (x itself for highpass_hz 0)"""
    if highpass_hz <= 0:
        return x
    if highpass_hz >= sample_rate / 2:
        raise ConfigException(f"must be below the Nyquist frequency {sample_rate / 2} but is {highpass_hz}",
                              "highpass_hz")
    sos = signal.butter(HIGHPASS_ORDER, highpass_hz, btype='highpass', fs=sample_rate, output='sos')
    return signal.sosfiltfilt(sos, x)


def cepstrum_lo_bin(highpass_hz: float, frame_len: int, sample_rate: int) -> int:
    return int(np.ceil(highpass_hz * frame_len / sample_rate))


def limited_gain(block: np.ndarray, echo: np.ndarray, echo_gain: float, block_snr_db: float) -> float:
    """echo_gain, lowered where needed so that block energy / added echo energy >= block_snr_db"""
    echo_energy = float(np.sum(echo * echo))
    if echo_energy < SILENT_ENERGY:
        return echo_gain
    block_energy = float(np.sum(block * block))
    return min(echo_gain, float(np.sqrt(10.0 ** (-block_snr_db / 10.0) * block_energy / echo_energy)))


class EchoWatermarker(BlockWatermarker):
    """
    Echo hiding: every block gets an echo of the high-passed signal delayed by delay0 (bit 0) or
    delay1 (bit 1). The echo of each block fades in and out over `taper` samples and its gain is
    echo_gain, capped per block so the echo stays block_snr_db below the block. Detection compares
    the cepstral prominence at both delays, computed from the band above highpass_hz.
    """
    name = SchemeName.echo.value

    def __init__(self, config: EchoConfig = None):
        super().__init__(config if config is not None else EchoConfig())
        self.mixer = edge_taper(self.config.block_len, self.config.taper)
        self._lo_bin = 0

    def embed(self, buf: AudioBuffer, payload: Payload, key: WatermarkKey) -> AudioBuffer:
        cfg = self.config
        assignment = block_assignment(len(buf), cfg.block_len, payload.length, key)
        x = buf.samples
        source = echo_source(x, cfg.highpass_hz, buf.sample_rate)
        echoes = {}
        for delay in (cfg.delay0, cfg.delay1):
            delayed = np.zeros(len(x))
            delayed[delay:] = source[:-delay]
            echoes[delay] = delayed

        out = x.copy()
        gains = []
        for idx, bit_idx in enumerate(assignment):
            start = idx * cfg.block_len
            stop = start + cfg.block_len
            delay = cfg.delay1 if payload.bits[bit_idx] else cfg.delay0
            echo = self.mixer * echoes[delay][start:stop]
            gain = limited_gain(x[start:stop], echo, cfg.echo_gain, cfg.block_snr_db)
            out[start:stop] += gain * echo
            gains.append(gain)
        logger.debug(f"echo: embedded {payload.length} bits into {len(assignment)} blocks, "
                     f"mean gain {np.mean(gains):.3f}.")
        return buf.with_samples(out)

    def detect(self, buf: AudioBuffer, key: WatermarkKey, payload_len: int) -> DetectionResult:
        self._lo_bin = cepstrum_lo_bin(self.config.highpass_hz, self.config.block_len // 2, buf.sample_rate)
        return super().detect(buf, key, payload_len)

    def _detect_block(self, block: np.ndarray, block_index: int, key: WatermarkKey):
        if np.sum(block * block) < SILENT_ENERGY:
            return None
        cepstrum = block_cepstrum(block, self._lo_bin)
        return cepstral_prominence(cepstrum, self.config.delay1) - cepstral_prominence(cepstrum, self.config.delay0)


def embed_echo(buf: AudioBuffer, payload: Payload, key: WatermarkKey, cfg: EchoConfig = None) -> AudioBuffer:
    return EchoWatermarker(cfg).embed(buf, payload, key)


def detect_echo(buf: AudioBuffer, key: WatermarkKey, payload_len: int = DEFAULT_PAYLOAD_LEN,
                cfg: EchoConfig = None) -> DetectionResult:
    return EchoWatermarker(cfg).detect(buf, key, payload_len)
