"""Small result containers shared across modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

KINDS = ("lower", "upper", "exact")


@dataclass(frozen=True)
class BoundValue:
    """A measure value tagged with whether it is exact or a one-sided bound."""

    value: float
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        object.__setattr__(self, "value", float(self.value))

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class MeasureReport:
    """Named measure values plus classification labels.

    ``values`` maps a measure name to a BoundValue, or to None when the
    measure is unavailable at this point.
    """

    values: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)

    def __getitem__(self, name) -> Optional[BoundValue]:
        return self.values[name]

    def value(self, name) -> Optional[float]:
        bv = self.values[name]
        return None if bv is None else bv.value
