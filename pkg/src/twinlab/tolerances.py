"""Numerical thresholds shared by every check in the package."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from typing import Mapping

ENV_TOL_OP = "TWINLAB_TOL_OP"


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used to turn floating-point residuals into verdicts.

    norm:  deviation of a vector norm (or a weight sum) from one
    op:    Frobenius / Euclidean residual for operator and vector equalities
    prob:  absolute gap between two probabilities
    p_min: probabilities at or below this are treated as zero
    spec:  eigenvalues closer than this are merged into one eigenprojector
    """

    norm: float = 1e-10
    op: float = 1e-9
    prob: float = 1e-9
    p_min: float = 1e-12
    spec: float = 1e-8

    def __post_init__(self) -> None:
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ValueError(f"tolerance {field.name!r} must be positive, got {value!r}")

    @property
    def amp_min(self) -> float:
        """Amplitude cutoff matching ``p_min`` (a norm below this is a zero vector)."""
        return self.p_min ** 0.5

    def replace(self, **changes: float) -> Tolerances:
        return dataclasses.replace(self, **{k: float(v) for k, v in changes.items() if v is not None})

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, data: Mapping[str, float], base: Tolerances | None = None) -> Tolerances:
        base = base or cls()
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return base.replace(**data)

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> Tolerances:
        environ = os.environ if environ is None else environ
        raw = environ.get(ENV_TOL_OP)
        if not raw:
            return cls()
        return cls(op=float(raw))


DEFAULT = Tolerances()


def resolve(tol: Tolerances | None) -> Tolerances:
    return DEFAULT if tol is None else tol


def is_marginal(residual: float, threshold: float) -> bool:
    """True when ``residual`` lies within a factor of ten of ``threshold`` on either side."""
    return threshold / 10.0 <= residual <= threshold * 10.0
