"""Detection result types shared by the codec families."""

from dataclasses import dataclass

from .messages import BitMessage


@dataclass(frozen=True)
class BitOutcome:
    """Extracted payload; accuracy is filled in once truth is known."""

    extracted: BitMessage
    bit_accuracy: float | None = None

    def scored(self, truth):
        from .messages import bit_accuracy

        return BitOutcome(self.extracted, bit_accuracy(self.extracted, truth))


@dataclass(frozen=True)
class PValueOutcome:
    """Annulus distance score and its null p-value."""

    eta: float
    p_value: float
    dof: int
    noncentrality: float
