import numpy as np

# snr reported for identical signals
SNR_CAP_DB = 120.0


def power(x: np.ndarray) -> float:
    """mean squared amplitude"""
    x = np.asarray(x, dtype=np.float64)
    return float(np.mean(x * x))


def rms(x: np.ndarray) -> float:
    return float(np.sqrt(power(x)))


def snr_db(reference: np.ndarray, degraded: np.ndarray) -> float:
    """
    10*log10(P_reference / P_difference), capped at SNR_CAP_DB when the signals are identical.
    """
    diff_power = power(np.asarray(reference) - np.asarray(degraded))
    ref_power = power(reference)
    if diff_power == 0.0:
        return SNR_CAP_DB
    if ref_power == 0.0:
        return -SNR_CAP_DB
    return float(min(10.0 * np.log10(ref_power / diff_power), SNR_CAP_DB))


def raised_cosine_ramp(length: int) -> np.ndarray:
    """Rising half-cosine from (almost) 0 to (almost) 1 over `length` samples, endpoints excluded."""
    if length <= 0:
        return np.zeros(0)
    n = np.arange(1, length + 1, dtype=np.float64)
    return 0.5 - 0.5 * np.cos(np.pi * n / (length + 1))


def edge_taper(block_len: int, ramp_len: int) -> np.ndarray:
    """
    Window of ones with raised-cosine ramps of `ramp_len` samples at both ends.
    """
    taper = np.ones(block_len)
    if ramp_len > 0:
        ramp = raised_cosine_ramp(ramp_len)
        taper[:ramp_len] = ramp
        taper[block_len - ramp_len:] = ramp[::-1]
    return taper


def fix_length(x: np.ndarray, length: int) -> np.ndarray:
    """Trims or zero-pads x at the end to exactly `length` samples."""
    if len(x) >= length:
        return np.array(x[:length], dtype=np.float64)
    return np.concatenate([x, np.zeros(length - len(x))])


def tile_to_length(x: np.ndarray, length: int) -> np.ndarray:
    if len(x) == 0:
        raise ValueError("Can't tile an empty array.")
    reps = int(np.ceil(length / len(x)))
    return np.tile(x, reps)[:length]
