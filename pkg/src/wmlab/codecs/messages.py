"""Fixed-length bit payloads carried by the bit-oriented watermarks."""

from dataclasses import dataclass

from ..errors import InvalidParameter

MESSAGE_BITS = 32


@dataclass(frozen=True)
class BitMessage:
    """Exactly 32 bits, serialized as a '0'/'1' string."""

    bits: tuple

    def __post_init__(self):
        if len(self.bits) != MESSAGE_BITS or not all(isinstance(b, bool) for b in self.bits):
            raise InvalidParameter(f"message must be {MESSAGE_BITS} bools")

    @staticmethod
    def from_string(text):
        text = text.strip()
        if len(text) != MESSAGE_BITS or set(text) - {"0", "1"}:
            raise InvalidParameter(f"expected {MESSAGE_BITS} chars of 0/1")
        return BitMessage(tuple(c == "1" for c in text))

    @staticmethod
    def random(stream):
        return BitMessage(tuple(bool(v) for v in stream.integers(0, 2, MESSAGE_BITS)))

    def to_string(self):
        return "".join("1" if b else "0" for b in self.bits)


def bit_accuracy(a, b):
    """Fraction of positions where two messages agree."""
    return sum(x == y for x, y in zip(a.bits, b.bits)) / MESSAGE_BITS
