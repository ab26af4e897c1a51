from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Condition:
    """One labelled necessary-and-sufficient condition and how it fared."""

    label: str
    holds: bool
    residual: float
    vacuous: bool = False


@dataclass(frozen=True)
class TwinVerdict:
    """Outcome of a twin test.

    ``is_twin`` comes from the defining equality; ``condition_sets`` holds the
    verdicts of each alternative characterization evaluated on its own.
    ``consistent`` is False when an alternative disagrees with the definition,
    which would falsify the corresponding equivalence theorem.
    """

    is_twin: bool
    residual: float
    per_condition: tuple[Condition, ...] = ()
    condition_sets: dict[str, bool] = field(default_factory=dict)
    degenerate: bool = False
    marginal: bool = False

    @property
    def consistent(self) -> bool:
        return all(v == self.is_twin for v in self.condition_sets.values())

    def condition(self, label: str) -> Condition:
        for c in self.per_condition:
            if c.label == label:
                return c
        raise KeyError(label)

    def residuals(self) -> dict[str, float]:
        out = {"definition": self.residual}
        out.update({c.label: c.residual for c in self.per_condition})
        return {k: (v if math.isfinite(v) else None) for k, v in out.items()}

    def __bool__(self) -> bool:
        return self.is_twin
