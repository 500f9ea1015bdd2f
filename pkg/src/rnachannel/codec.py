"""Byte <-> nucleotide codec.

A byte is four base-4 digits, most significant first, mapped through
A=0, C=1, G=2, U=3.  One byte therefore costs four nucleotides and the
mapping is invertible with no padding.
"""

from __future__ import annotations

import numpy as np

LETTERS = "ACGU"

# 256-entry inverse lookup; 255 marks characters outside the alphabet
_CHAR_TO_DIGIT = np.full(256, 255, dtype=np.uint8)
for _i, _c in enumerate(LETTERS):
    _CHAR_TO_DIGIT[ord(_c)] = _i
_DIGIT_TO_CHAR = np.frombuffer(LETTERS.encode("ascii"), dtype=np.uint8)


class InvalidNucleotide(ValueError):
    """Input contains a character outside A/C/G/U."""


class InvalidDigit(ValueError):
    """Digit outside 0..3."""


class LengthNotMultipleOfFour(ValueError):
    """Nucleotide text cannot be framed into whole bytes."""


def nucleotide_to_digit(nt: str) -> int:
    if len(nt) != 1:
        raise InvalidNucleotide(f"expected a single character, got {nt!r}")
    d = _CHAR_TO_DIGIT[ord(nt) & 0xFF] if ord(nt) < 256 else 255
    if d == 255:
        raise InvalidNucleotide(f"not a nucleotide: {nt!r}")
    return int(d)


def digit_to_nucleotide(d: int) -> str:
    if not 0 <= int(d) <= 3:
        raise InvalidDigit(f"digit out of range 0..3: {d!r}")
    return LETTERS[int(d)]


def str_to_digits(s: str) -> np.ndarray:
    """ACGU text -> uint8 digit array."""
    try:
        raw = np.frombuffer(s.encode("ascii"), dtype=np.uint8)
    except UnicodeEncodeError as exc:
        raise InvalidNucleotide(f"non-ASCII character in nucleotide text: {exc}") from None
    digits = _CHAR_TO_DIGIT[raw]
    bad = np.nonzero(digits == 255)[0]
    if bad.size:
        i = int(bad[0])
        raise InvalidNucleotide(f"not a nucleotide at position {i}: {s[i]!r}")
    return digits


def digits_to_str(digits) -> str:
    digits = np.asarray(digits)
    if digits.size and (digits.min() < 0 or digits.max() > 3):
        raise InvalidDigit("digits must be in 0..3")
    return _DIGIT_TO_CHAR[digits.astype(np.intp)].tobytes().decode("ascii")


def encode_to_digits(data: bytes) -> np.ndarray:
    """Bytes -> uint8 digit array, four digits per byte, MSB first."""
    b = np.frombuffer(bytes(data), dtype=np.uint8)
    out = np.empty(4 * b.size, dtype=np.uint8)
    out[0::4] = b >> 6
    out[1::4] = (b >> 4) & 3
    out[2::4] = (b >> 2) & 3
    out[3::4] = b & 3
    return out


def decode_digits(digits) -> bytes:
    digits = np.asarray(digits, dtype=np.int64)
    if digits.size % 4 != 0:
        raise LengthNotMultipleOfFour(
            f"{digits.size} digits cannot frame into whole bytes"
        )
    if digits.size and (digits.min() < 0 or digits.max() > 3):
        raise InvalidDigit("digits must be in 0..3")
    q = digits.reshape(-1, 4)
    b = (q[:, 0] << 6) | (q[:, 1] << 4) | (q[:, 2] << 2) | q[:, 3]
    return b.astype(np.uint8).tobytes()


def encode_bytes(data: bytes) -> str:
    """Encode bytes as nucleotide text."""
    return digits_to_str(encode_to_digits(data))


def decode_bytes(s: str) -> bytes:
    """Decode nucleotide text back to bytes.

    Raises LengthNotMultipleOfFour when the text cannot be framed and
    InvalidNucleotide on characters outside the alphabet.
    """
    if len(s) % 4 != 0:
        raise LengthNotMultipleOfFour(
            f"{len(s)} nucleotides cannot frame into whole bytes"
        )
    return decode_digits(str_to_digits(s))
