"""Greedy decomposition of a length into pieces of prescribed threshold lengths."""

from fractions import Fraction

from pydantic import BaseModel, ConfigDict

from src.service.exceptions import BadThresholdsError

Number = int | float | Fraction


class PartitionPiece(BaseModel):
    """Consecutive subsegment [start, end]; level 0 is the leftover."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    level: int
    start: Fraction
    end: Fraction


class GreedyPartition(BaseModel):
    """Leftover of length < T_1 followed by m_k pieces of length exactly T_k per level.

    `multiplicities[k - 1]` is m_k. All lengths are exact fractions of the inputs.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    length: Fraction
    thresholds: tuple[Fraction, ...]
    multiplicities: tuple[int, ...]
    leftover: Fraction
    pieces: tuple[PartitionPiece, ...]

    def violations(self) -> list[str]:
        """Conditions of the decomposition that fail, empty when it is valid."""
        found = []
        if not self.leftover < self.thresholds[0]:
            found.append(f"leftover {self.leftover} is not below T_1 = {self.thresholds[0]}")
        total = self.leftover + sum(
            (m * t for m, t in zip(self.multiplicities, self.thresholds, strict=True)),
            Fraction(0),
        )
        if total != self.length:
            found.append(f"pieces add up to {total}, not {self.length}")
        ceilings = (*self.thresholds[1:], self.length)
        for k, (m, low, high) in enumerate(
            zip(self.multiplicities, self.thresholds, ceilings, strict=True), start=1
        ):
            if m * low > high:
                found.append(f"m_{k} = {m} exceeds T_{k + 1} / T_{k} = {high / low}")
        for piece in self.pieces:
            if piece.level and piece.end - piece.start != self.thresholds[piece.level - 1]:
                found.append(f"piece at {piece.start} is not of length T_{piece.level}")
        return found


def _exact(value: Number) -> Fraction:
    """Floats are read through their shortest decimal representation."""
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def greedy_partition(length: Number, thresholds: list[Number]) -> GreedyPartition:
    """Cut a length greedily, largest threshold first, with T_{N+1} set to the length.

    Args:
        length: Total length, positive.
        thresholds: Strictly increasing positive T_1 < ... < T_N.

    Raises:
        BadThresholdsError: If the thresholds are empty, not positive or not increasing,
            or the length is not positive.

    Returns:
        GreedyPartition: Multiplicities m_1..m_N, the leftover and the pieces in order.
    """
    total = _exact(length)
    levels = [_exact(t) for t in thresholds]
    if total <= 0:
        error_msg = f"Length must be positive, got {length}"
        raise BadThresholdsError(error_msg)
    if not levels or levels[0] <= 0:
        error_msg = f"Thresholds must be non-empty and positive, got {thresholds}"
        raise BadThresholdsError(error_msg)
    if any(b <= a for a, b in zip(levels, levels[1:], strict=False)):
        error_msg = f"Thresholds must be strictly increasing, got {thresholds}"
        raise BadThresholdsError(error_msg)
    remaining = total
    multiplicities = [0] * len(levels)
    for k in range(len(levels) - 1, -1, -1):
        count = int(remaining // levels[k])
        multiplicities[k] = count
        remaining -= count * levels[k]
    pieces = [PartitionPiece(level=0, start=Fraction(0), end=remaining)]
    cursor = remaining
    for k, (count, size) in enumerate(zip(multiplicities, levels, strict=True), start=1):
        for _ in range(count):
            pieces.append(PartitionPiece(level=k, start=cursor, end=cursor + size))
            cursor += size
    return GreedyPartition(
        length=total,
        thresholds=tuple(levels),
        multiplicities=tuple(multiplicities),
        leftover=remaining,
        pieces=tuple(pieces),
    )
