import numpy as np


def bits_to_hex(bits: np.ndarray) -> str:
    """
    Most-significant bit first. Bit vectors whose length is not a multiple of 4 are left-padded
    with zeros, so 6 bits 101101 become '2D'.
    """
    bits = np.asarray(bits, dtype=bool)
    pad = (-len(bits)) % 4
    padded = np.concatenate([np.zeros(pad, dtype=bool), bits])
    digits = []
    for idx in range(0, len(padded), 4):
        nibble = padded[idx:idx + 4]
        value = int(nibble[0]) * 8 + int(nibble[1]) * 4 + int(nibble[2]) * 2 + int(nibble[3])
        digits.append(format(value, 'X'))
    return ''.join(digits)


def hex_to_bits(hex_str: str, n_bits: int = None) -> np.ndarray:
    """
    Inverse of bits_to_hex. Without n_bits every hex digit yields 4 bits. With n_bits the string must
    have exactly ceil(n_bits / 4) digits and the padding bits must be zero.

    Raises ValueError on malformed input.
    """
    hex_str = hex_str.strip()
    if hex_str.lower().startswith("0x"):
        hex_str = hex_str[2:]
    if len(hex_str) == 0:
        raise ValueError("Empty hex string.")
    try:
        value = int(hex_str, 16)
    except ValueError as err:
        raise ValueError(f"'{hex_str}' is not a valid hexadecimal string.") from err

    total_bits = 4 * len(hex_str)
    if n_bits is None:
        n_bits = total_bits
    elif len(hex_str) != -(-n_bits // 4):
        raise ValueError(f"Expected {-(-n_bits // 4)} hex digits for {n_bits} bits but got {len(hex_str)}.")
    if value >> n_bits:
        raise ValueError(f"Hex value '{hex_str}' does not fit into {n_bits} bits.")
    return np.array([(value >> (n_bits - 1 - i)) & 1 for i in range(n_bits)], dtype=bool)
