"""Exact (pre)measurement of an object A by an instrument B.

A scheme couples a measured observable on A to a pointer observable on B
through a unitary ``U_AB`` acting on ``A (x) B``.  The calibration condition
requires the pointer branch ``k`` to be certain after the interaction whenever
the measured branch ``k`` was certain before it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .delayed import is_delayed_twin_observables
from .errors import DimensionError, PreconditionError, ValidationError
from .events import certainty_residual
from .hilbert import (
    DiscreteObservable,
    EventProjector,
    StateVector,
    UnitaryEvolution,
    tensor,
)
from .sampling import orthonormal_complement
from .tolerances import Tolerances, resolve
from .verdict import Condition, TwinVerdict

__all__ = [
    "MeasurementScheme",
    "MeasurementVerdict",
    "complete_isometry",
    "build_nondemolition_premeasurement",
    "build_demolition_premeasurement",
    "check_calibration",
    "check_probability_reproducibility",
    "check_branch_relation",
    "check_nondemolition",
    "measured_pointer_delayed_twins",
]

Kind = Literal["nondemolition", "demolition"]


@dataclass(frozen=True)
class MeasurementScheme:
    measured: DiscreteObservable
    pointer: DiscreteObservable
    pointer_init: StateVector
    premeasurement: UnitaryEvolution
    kind: Kind = "nondemolition"

    def __post_init__(self) -> None:
        if len(self.measured) != len(self.pointer):
            raise ValidationError(
                f"measured and pointer observables need equal branch counts "
                f"({len(self.measured)} vs {len(self.pointer)})"
            )
        if self.pointer_init.dim != self.pointer.dim:
            raise DimensionError("pointer_init does not live on the instrument space")
        if self.premeasurement.dim != self.dim_a * self.dim_b:
            raise DimensionError(
                f"premeasurement acts on dim {self.premeasurement.dim}, expected {self.dim_a * self.dim_b}"
            )

    @property
    def dim_a(self) -> int:
        return self.measured.dim

    @property
    def dim_b(self) -> int:
        return self.pointer.dim

    def lifted_measured(self) -> DiscreteObservable:
        """``O_A (x) I_B`` branchwise."""
        ib = EventProjector.identity(self.dim_b)
        return DiscreteObservable((v, tensor(p, ib)) for v, p in self.measured.branches)

    def lifted_pointer(self) -> DiscreteObservable:
        """``I_A (x) P_B`` branchwise."""
        ia = EventProjector.identity(self.dim_a)
        return DiscreteObservable((v, tensor(ia, p)) for v, p in self.pointer.branches)

    def initial(self, psi_a: StateVector) -> StateVector:
        if psi_a.dim != self.dim_a:
            raise DimensionError(f"object state has dim {psi_a.dim}, expected {self.dim_a}")
        return tensor(psi_a, self.pointer_init)

    def final(self, psi_a: StateVector) -> StateVector:
        return self.premeasurement.apply(self.initial(psi_a))

    def eigenbasis_inputs(self) -> list[tuple[int, StateVector]]:
        """Orthonormal eigenbasis of every measured branch, tagged with its branch index."""
        return [
            (k, StateVector(col))
            for k, p in enumerate(self.measured.projectors)
            for col in p.range_basis.T
        ]


@dataclass(frozen=True)
class MeasurementVerdict:
    holds: bool
    residual: float
    per_branch: tuple[Condition, ...] = ()


def _verdict(conds: list[Condition]) -> MeasurementVerdict:
    return MeasurementVerdict(
        holds=all(c.holds for c in conds),
        residual=max((c.residual for c in conds), default=0.0),
        per_branch=tuple(conds),
    )


def complete_isometry(inputs: np.ndarray, outputs: np.ndarray) -> np.ndarray:
    """Unitary mapping orthonormal ``inputs`` columns onto orthonormal ``outputs`` columns.

    The orthogonal complements are paired column by column in the order
    returned by ``orthonormal_complement``, which is deterministic.
    """
    if inputs.shape != outputs.shape:
        raise ValidationError("inputs and outputs must have the same shape")
    n = inputs.shape[0]
    win = orthonormal_complement(inputs, n)
    wout = orthonormal_complement(outputs, n)
    return outputs @ inputs.conj().T + wout @ win.conj().T


def _pointer(k_count: int, dim_b: int, values: Sequence[float] | None) -> tuple[DiscreteObservable, StateVector]:
    if dim_b < k_count:
        raise PreconditionError(f"instrument dimension {dim_b} < number of branches {k_count}")
    values = list(range(k_count)) if values is None else [float(v) for v in values]
    if len(values) != k_count:
        raise PreconditionError(f"need {k_count} pointer values, got {len(values)}")
    if len(set(values)) != len(values):
        raise PreconditionError("pointer values must be distinct")
    eye = np.eye(dim_b)
    projectors = [EventProjector.from_basis(eye[:, [k]]) for k in range(k_count - 1)]
    projectors.append(EventProjector.from_basis(eye[:, k_count - 1:]))
    return DiscreteObservable(zip(values, projectors)), StateVector.basis(dim_b, 0)


def build_nondemolition_premeasurement(
    measured: DiscreteObservable, dim_b: int, pointer_values: Sequence[float] | None = None
) -> MeasurementScheme:
    """``|a>|b_0> -> |a>|b_k>`` for every eigenvector ``|a>`` in branch ``k``.

    Pointer states are the instrument basis vectors; the last pointer branch
    also absorbs any surplus instrument dimensions.
    """
    pointer, init = _pointer(len(measured), dim_b, pointer_values)
    eye_b = np.eye(dim_b)
    ins, outs = [], []
    for k, p in enumerate(measured.projectors):
        for a in p.range_basis.T:
            ins.append(np.kron(a, eye_b[:, 0]))
            outs.append(np.kron(a, eye_b[:, k]))
    u = complete_isometry(np.column_stack(ins), np.column_stack(outs))
    return MeasurementScheme(measured, pointer, init, UnitaryEvolution(u), "nondemolition")


def build_demolition_premeasurement(
    measured: DiscreteObservable,
    dim_b: int,
    pointer_values: Sequence[float] | None = None,
    sink_state: StateVector | None = None,
) -> MeasurementScheme:
    """Like the nondemolition scheme, but the object is dumped into a sink.

    Eigenvector ``j`` of branch ``k`` goes to ``|c_j>|b_k>`` where ``c_0`` is the
    sink state and ``c_1, c_2, ...`` complete it to an orthonormal basis, so the
    object's final state no longer depends on ``k``.
    """
    pointer, init = _pointer(len(measured), dim_b, pointer_values)
    dim_a = measured.dim
    sink = StateVector.basis(dim_a, 0) if sink_state is None else sink_state
    if sink.dim != dim_a:
        raise DimensionError(f"sink state has dim {sink.dim}, expected {dim_a}")
    targets = np.column_stack([sink.amplitudes, orthonormal_complement(sink.amplitudes, dim_a)])
    eye_b = np.eye(dim_b)
    ins, outs = [], []
    for k, p in enumerate(measured.projectors):
        for j, a in enumerate(p.range_basis.T):
            ins.append(np.kron(a, eye_b[:, 0]))
            outs.append(np.kron(targets[:, j], eye_b[:, k]))
    u = complete_isometry(np.column_stack(ins), np.column_stack(outs))
    return MeasurementScheme(measured, pointer, init, UnitaryEvolution(u), "demolition")


def check_calibration(
    scheme: MeasurementScheme, psi_a: StateVector | None = None, tol: Tolerances | None = None
) -> MeasurementVerdict:
    """Certain measured branch before => certain pointer branch after.

    With ``psi_a`` omitted the check runs over an eigenbasis of every branch,
    which by linearity covers every state in which some branch is certain.
    """
    tol = resolve(tol)
    if psi_a is None:
        inputs = scheme.eigenbasis_inputs()
    else:
        inputs = [
            (k, psi_a)
            for k, p in enumerate(scheme.measured.projectors)
            if certainty_residual(p, psi_a) <= tol.op
        ]
    pointer = scheme.lifted_pointer().projectors
    conds = []
    for k, state in inputs:
        r = certainty_residual(pointer[k], scheme.final(state))
        conds.append(Condition(f"k={k}", r <= tol.op, r))
    return _verdict(conds)


def check_probability_reproducibility(
    scheme: MeasurementScheme, psi_a: StateVector, tol: Tolerances | None = None
) -> MeasurementVerdict:
    """Measured-branch probabilities equal final pointer-branch probabilities."""
    tol = resolve(tol)
    final = scheme.final(psi_a)
    conds = []
    for k, (e, f) in enumerate(zip(scheme.measured.projectors, scheme.lifted_pointer().projectors)):
        gap = abs(e.probability(psi_a) - f.probability(final))
        conds.append(Condition(f"k={k}", gap <= tol.prob, gap))
    return _verdict(conds)


def check_branch_relation(
    scheme: MeasurementScheme, psi_a: StateVector, tol: Tolerances | None = None
) -> MeasurementVerdict:
    """The pointer-``k`` part of the final state is the evolved measured-``k`` part of the initial one.

    Also checks that both parts carry the same norm.  Branches of negligible
    probability are skipped.
    """
    tol = resolve(tol)
    final = scheme.final(psi_a).amplitudes
    u = scheme.premeasurement.matrix
    conds = []
    for k, (e, f) in enumerate(zip(scheme.measured.projectors, scheme.lifted_pointer().projectors)):
        part = e.matrix @ psi_a.amplitudes
        n_early = float(np.linalg.norm(part))
        if n_early ** 2 <= tol.p_min:
            continue
        lhs = u @ np.kron(part / n_early, scheme.pointer_init.amplitudes)
        late = f.matrix @ final
        n_late = float(np.linalg.norm(late))
        r = float(np.linalg.norm(lhs - late / n_late)) if n_late > tol.amp_min else 1.0
        gap = abs(n_early - n_late)
        conds.append(Condition(f"k={k}", r <= tol.op and gap <= tol.prob, max(r, gap)))
    return _verdict(conds)


def check_nondemolition(scheme: MeasurementScheme, tol: Tolerances | None = None) -> MeasurementVerdict:
    """A sharp measured value survives: ``E_A^k (x) I`` stays certain for eigenbasis inputs."""
    tol = resolve(tol)
    lifted = scheme.lifted_measured().projectors
    conds = []
    for k, state in scheme.eigenbasis_inputs():
        r = certainty_residual(lifted[k], scheme.final(state))
        conds.append(Condition(f"k={k}", r <= tol.op, r))
    return _verdict(conds)


def measured_pointer_delayed_twins(
    scheme: MeasurementScheme, psi_a: StateVector, tol: Tolerances | None = None
) -> TwinVerdict:
    return is_delayed_twin_observables(
        scheme.lifted_measured(),
        scheme.lifted_pointer(),
        scheme.initial(psi_a),
        scheme.premeasurement,
        tol,
    )
