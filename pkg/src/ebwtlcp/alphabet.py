"""Symbol encoding and collection bookkeeping.

Source bytes are mapped to dense codes ``1..sigma`` in byte order.  Code 0 is
the end-marker, shared by every string; equal suffixes are ordered by string
index instead of by distinct markers.  Code 255 is the pad cell used in the
transposed input and never reaches a segment file.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AlphabetTooLarge, EmptyInput, EndMarkerCollision, UnknownSymbol

ENDMARKER_CODE = 0
PAD_CODE = 255
MAX_SIGMA = 254
DEFAULT_ENDMARKER = ord("$")
PAD_GLYPH = ord("#")

_WIDTHS = (1, 2, 4, 8)


def width_for(value: int, choices: Sequence[int] = _WIDTHS) -> int:
    """Smallest byte width in ``choices`` able to hold ``value`` unsigned."""
    for w in choices:
        if value < (1 << (8 * w)):
            return w
    raise ValueError(f"value {value} does not fit in {max(choices)} bytes")


def uint_dtype(width: int) -> np.dtype:
    return np.dtype(f"<u{width}")


@dataclass(frozen=True)
class Alphabet:
    symbols: bytes
    endmarker: int = DEFAULT_ENDMARKER
    _encode: bytes = field(init=False, repr=False, compare=False)
    _decode: bytes = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols) or list(self.symbols) != sorted(self.symbols):
            raise ValueError("symbols must be distinct and sorted")
        if len(self.symbols) > MAX_SIGMA:
            raise AlphabetTooLarge(f"{len(self.symbols)} distinct bytes, at most {MAX_SIGMA} supported")
        if self.endmarker in self.symbols:
            raise EndMarkerCollision(f"end-marker byte {self.endmarker:#04x} occurs in the data")
        enc = bytearray([PAD_CODE]) * 256
        dec = bytearray([PAD_GLYPH]) * 256
        dec[ENDMARKER_CODE] = self.endmarker
        for code, b in enumerate(self.symbols, start=1):
            enc[b] = code
            dec[code] = b
        object.__setattr__(self, "_encode", bytes(enc))
        object.__setattr__(self, "_decode", bytes(dec))

    @property
    def sigma(self) -> int:
        return len(self.symbols)

    @property
    def endmarker_code(self) -> int:
        return ENDMARKER_CODE

    def encode(self, byte: int) -> int:
        code = self._encode[byte]
        if code == PAD_CODE:
            raise UnknownSymbol(f"byte {byte:#04x} is not in the alphabet")
        return code

    def decode(self, code: int) -> int:
        if not 0 <= code <= self.sigma:
            raise UnknownSymbol(f"code {code} outside 0..{self.sigma}")
        return self._decode[code]

    def encode_bytes(self, data: bytes) -> bytes:
        out = data.translate(self._encode)
        if PAD_CODE in out:
            bad = data[out.index(PAD_CODE)]
            raise UnknownSymbol(f"byte {bad:#04x} is not in the alphabet")
        return out

    def decode_bytes(self, codes: bytes) -> bytes:
        """Render codes as source bytes; the end-marker becomes its glyph."""
        return bytes(codes).translate(self._decode)

    def to_json(self) -> dict:
        return {"symbols": list(self.symbols), "endmarker": self.endmarker}

    @classmethod
    def from_json(cls, obj: dict) -> "Alphabet":
        return cls(bytes(obj["symbols"]), obj.get("endmarker", DEFAULT_ENDMARKER))


def build_alphabet(byte_stream: bytes | Iterable[bytes], endmarker: int = DEFAULT_ENDMARKER) -> Alphabet:
    """Collect the distinct bytes of ``byte_stream`` (raw strings, no markers)."""
    if isinstance(byte_stream, (bytes, bytearray, memoryview)):
        byte_stream = [bytes(byte_stream)]
    seen = np.zeros(256, dtype=bool)
    for chunk in byte_stream:
        if chunk:
            seen[np.frombuffer(chunk, dtype=np.uint8)] = True
    if not seen.any():
        raise EmptyInput("no symbols in input")
    if seen[endmarker]:
        raise EndMarkerCollision(f"end-marker byte {endmarker:#04x} occurs in the data")
    symbols = bytes(np.flatnonzero(seen).astype(np.uint8))
    if len(symbols) > MAX_SIGMA:
        raise AlphabetTooLarge(f"{len(symbols)} distinct bytes, at most {MAX_SIGMA} supported")
    return Alphabet(symbols, endmarker)


@dataclass
class CollectionMeta:
    """Counts for a collection; every length includes the end-marker."""

    lengths: np.ndarray

    def __post_init__(self):
        self.lengths = np.asarray(self.lengths, dtype=np.int64)
        if self.lengths.ndim != 1:
            raise ValueError("lengths must be one-dimensional")
        if len(self.lengths) and self.lengths.min() < 2:
            raise ValueError("every string needs at least one symbol before its end-marker")

    @property
    def m(self) -> int:
        return int(len(self.lengths))

    @property
    def N(self) -> int:
        return int(self.lengths.sum())

    @property
    def K(self) -> int:
        return int(self.lengths.max()) if len(self.lengths) else 0

    @classmethod
    def from_strings(cls, strings: Iterable[bytes]) -> "CollectionMeta":
        return cls(np.fromiter((len(s) + 1 for s in strings), dtype=np.int64))
