"""Delayed twins: events and observables separated by a unitary evolution.

``E`` at ``t0`` and ``F`` at ``t`` are delayed twins in ``psi0`` for ``U`` when
``U E psi0 == F U psi0``.  Equivalently ``F`` is a simultaneous twin of the
transported event ``U E U^dag`` in the evolved state ``U psi0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import events
from ._matching import branch_vectors, criterion, definition_verdict, match
from .errors import DimensionError, PreconditionError, TheoremViolation
from .hilbert import (
    DiscreteObservable,
    EventProjector,
    MixedState,
    StateVector,
    UnitaryEvolution,
    frob,
)
from .observables import observable_conditions
from .sampling import SeedLike, rng_from
from .tolerances import Tolerances, is_marginal, resolve
from .verdict import Condition, TwinVerdict

__all__ = [
    "DelayedPair",
    "is_delayed_twin",
    "trivial_delayed_twin",
    "Proposition1Report",
    "verify_proposition1",
    "BiconditionalReport",
    "verify_proposition2",
    "verify_theorem4",
    "pairs_equivalent",
    "verify_theorem5",
    "is_delayed_twin_observables",
    "verify_theorem6",
    "NonselectiveComparison",
    "compare_nonselective",
    "chain",
]


def _dims(*objs) -> None:
    dims = {o.dim for o in objs}
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")


@dataclass(frozen=True)
class DelayedPair:
    e: EventProjector
    f: EventProjector
    psi0: StateVector
    u: UnitaryEvolution

    def __post_init__(self) -> None:
        _dims(self.e, self.f, self.psi0, self.u)

    @property
    def psi_t(self) -> StateVector:
        return self.u.apply(self.psi0)

    def verdict(self, tol: Tolerances | None = None) -> TwinVerdict:
        return is_delayed_twin(self.e, self.f, self.psi0, self.u, tol)


def is_delayed_twin(
    e: EventProjector,
    f: EventProjector,
    psi0: StateVector,
    u: UnitaryEvolution,
    tol: Tolerances | None = None,
) -> TwinVerdict:
    tol = resolve(tol)
    _dims(e, f, psi0, u)
    ev = e.matrix @ psi0.amplitudes
    residual = float(np.linalg.norm(u.matrix @ ev - f.matrix @ (u.matrix @ psi0.amplitudes)))
    twin = residual <= tol.op
    return TwinVerdict(
        is_twin=twin,
        residual=residual,
        degenerate=twin and np.linalg.norm(ev) <= tol.amp_min,
        marginal=is_marginal(residual, tol.op),
    )


def trivial_delayed_twin(e: EventProjector, u: UnitaryEvolution) -> EventProjector:
    """``U E U^dag``, a delayed twin of ``e`` in every state."""
    _dims(e, u)
    return u.conjugate(e)


@dataclass(frozen=True)
class Proposition1Report:
    forward: tuple[float, ...]
    backward: tuple[float, ...]
    minimal_transport: float
    tolerance: float

    @property
    def max_residual(self) -> float:
        return max((*self.forward, *self.backward, self.minimal_transport), default=0.0)

    @property
    def holds(self) -> bool:
        return self.max_residual <= self.tolerance


def verify_proposition1(
    e: EventProjector,
    psi0: StateVector,
    u: UnitaryEvolution,
    samples: int = 20,
    seed: SeedLike = None,
    tol: Tolerances | None = None,
) -> Proposition1Report:
    """Sample both inclusions of ``[U E U^dag] == {U E' U^dag : E' in [E]}``.

    forward: transported members of ``[E]`` are twins of ``U E U^dag`` in ``U psi0``;
    backward: pulled-back members of ``[U E U^dag]`` are twins of ``E`` in ``psi0``.
    """
    tol = resolve(tol)
    _dims(e, psi0, u)
    rng = rng_from(seed)
    psi_t = u.apply(psi0)
    moved = u.conjugate(e)
    early, late = events.twin_class(e, psi0, tol), events.twin_class(moved, psi_t, tol)
    back = u.dagger

    forward, backward = [], []
    for _ in range(samples):
        member = early.sample(int(rng.integers(0, early.room + 1)), rng)
        forward.append(events.is_twin(u.conjugate(member), moved, psi_t, tol).residual)
        member = late.sample(int(rng.integers(0, late.room + 1)), rng)
        backward.append(events.is_twin(back.conjugate(member), e, psi0, tol).residual)

    transported = u.conjugate(events.minimal_twin(e, psi0, tol)).matrix
    minimal = frob(transported - events.minimal_twin(moved, psi_t, tol).matrix)
    return Proposition1Report(tuple(forward), tuple(backward), minimal, tol.op)


@dataclass(frozen=True)
class BiconditionalReport:
    """Verdicts entering one or more claimed biconditionals ``lhs <=> rhs``."""

    verdicts: dict[str, bool]
    biconditionals: tuple[tuple[str, str], ...]
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(self.verdicts[a] == self.verdicts[b] for a, b in self.biconditionals)


def verify_proposition2(
    e: EventProjector,
    e_prime: EventProjector,
    f: EventProjector,
    f_prime: EventProjector,
    psi0: StateVector,
    u: UnitaryEvolution,
    tol: Tolerances | None = None,
) -> BiconditionalReport:
    tol = resolve(tol)
    _dims(e, e_prime, f, f_prime, psi0, u)
    if not is_delayed_twin(e, f, psi0, u, tol):
        raise PreconditionError("(E, F) are not delayed twins")
    psi_t = u.apply(psi0)
    checks = {
        "delayed(E,F')": is_delayed_twin(e, f_prime, psi0, u, tol),
        "twin(F,F') at t": events.is_twin(f, f_prime, psi_t, tol),
        "delayed(E',F)": is_delayed_twin(e_prime, f, psi0, u, tol),
        "twin(E,E') at t0": events.is_twin(e, e_prime, psi0, tol),
    }
    return BiconditionalReport(
        verdicts={k: v.is_twin for k, v in checks.items()},
        biconditionals=(("delayed(E,F')", "twin(F,F') at t"), ("delayed(E',F)", "twin(E,E') at t0")),
        residuals={k: v.residual for k, v in checks.items()},
    )


def verify_theorem4(
    e: EventProjector,
    e_prime: EventProjector,
    f: EventProjector,
    psi0: StateVector,
    u: UnitaryEvolution,
    f_prime: EventProjector | None = None,
    tol: Tolerances | None = None,
) -> BiconditionalReport:
    """Delayed twinning is decided class-wise.

    A: for ``E'`` in ``[E]``, ``(E', F)`` are delayed twins iff ``F`` twins ``U E U^dag`` at ``t``.
    B: for ``F'`` in ``[F]`` (default ``F``), ``(E, F')`` are delayed twins iff ``E`` twins
    ``U^dag F U`` at ``t0``.
    """
    tol = resolve(tol)
    f_prime = f if f_prime is None else f_prime
    _dims(e, e_prime, f, f_prime, psi0, u)
    psi_t = u.apply(psi0)
    if not events.is_twin(e_prime, e, psi0, tol):
        raise PreconditionError("E' is not in the twin class of E")
    if not events.is_twin(f_prime, f, psi_t, tol):
        raise PreconditionError("F' is not in the twin class of F")
    checks = {
        "delayed(E',F)": is_delayed_twin(e_prime, f, psi0, u, tol),
        "twin(UEU^dag,F) at t": events.is_twin(u.conjugate(e), f, psi_t, tol),
        "delayed(E,F')": is_delayed_twin(e, f_prime, psi0, u, tol),
        "twin(E,U^dag F U) at t0": events.is_twin(e, u.dagger.conjugate(f), psi0, tol),
    }
    return BiconditionalReport(
        verdicts={k: v.is_twin for k, v in checks.items()},
        biconditionals=(
            ("delayed(E',F)", "twin(UEU^dag,F) at t"),
            ("delayed(E,F')", "twin(E,U^dag F U) at t0"),
        ),
        residuals={k: v.residual for k, v in checks.items()},
    )


def pairs_equivalent(
    e: EventProjector,
    f: EventProjector,
    e_prime: EventProjector,
    f_prime: EventProjector,
    psi0: StateVector,
    u: UnitaryEvolution,
    tol: Tolerances | None = None,
) -> bool:
    """Two delayed-twin pairs are equivalent when their early and their late events are twins.

    For genuine pairs the two conjuncts always agree; a disagreement raises
    ``TheoremViolation``.
    """
    tol = resolve(tol)
    _dims(e, f, e_prime, f_prime, psi0, u)
    if not is_delayed_twin(e, f, psi0, u, tol):
        raise PreconditionError("(E, F) are not delayed twins")
    if not is_delayed_twin(e_prime, f_prime, psi0, u, tol):
        raise PreconditionError("(E', F') are not delayed twins")
    early = events.is_twin(e, e_prime, psi0, tol).is_twin
    late = events.is_twin(f, f_prime, u.apply(psi0), tol).is_twin
    if early != late:
        raise TheoremViolation(f"early twin verdict {early} differs from late verdict {late}")
    return early and late


def verify_theorem5(
    e: EventProjector,
    f: EventProjector,
    psi0: StateVector,
    u: UnitaryEvolution,
    tol: Tolerances | None = None,
) -> TwinVerdict:
    """Delayed twin test via opposite events, probability plus commuting collapse,
    certainty after (inverse) delay, and certainty after ideal occurrence.

    Requires ``E psi0 != 0``.
    """
    tol = resolve(tol)
    base = is_delayed_twin(e, f, psi0, u, tol)
    um, v0 = u.matrix, psi0.amplitudes
    vt = um @ v0
    ev, fv = e.matrix @ v0, f.matrix @ vt
    pe, pf = float(np.vdot(v0, ev).real), float(np.vdot(vt, fv).real)
    if pe <= tol.p_min:
        raise PreconditionError(f"E has negligible probability {pe:.3e} in the initial state")

    r_i = float(np.linalg.norm(um @ (v0 - ev) - (vt - fv)))
    r_iia = abs(pe - pf)
    phi = um @ ev / np.sqrt(pe)  # collapsed on E, then evolved
    nf = np.linalg.norm(fv)
    if nf > tol.amp_min:
        r_iib = float(np.linalg.norm(phi - fv / nf))
        chi = um.conj().T @ (fv / nf)  # collapsed on F, then evolved backwards
        r_iiib = events.certainty_residual(e, chi)
    else:
        r_iib = r_iiib = 1.0
    r_iiia = events.certainty_residual(f, phi)

    ec = v0 - ev
    nc = np.linalg.norm(ec)
    if nc > tol.amp_min:
        xi = um @ ec / nc
        r_ivb = float(np.linalg.norm(f.matrix @ xi))
        ivb = Condition("(iv)(b)", r_ivb <= tol.op, r_ivb)
    else:
        ivb = Condition("(iv)(b)", True, 0.0, vacuous=True)

    conds = (
        Condition("(i)", r_i <= tol.op, r_i),
        Condition("(ii)(a)", r_iia <= tol.prob, r_iia),
        Condition("(ii)(b)", r_iib <= tol.op, r_iib),
        Condition("(iii)(a)", r_iiia <= tol.op, r_iiia),
        Condition("(iii)(b)", r_iiib <= tol.op, r_iiib),
        Condition("(iv)(a)", r_iiia <= tol.op, r_iiia),
        ivb,
    )
    by = {c.label: c.holds for c in conds}
    transported = events.is_twin(u.conjugate(e), f, StateVector.normalized(vt), tol)
    return TwinVerdict(
        is_twin=base.is_twin,
        residual=base.residual,
        per_condition=conds,
        condition_sets={
            "(i)": by["(i)"],
            "(ii)": by["(ii)(a)"] and by["(ii)(b)"],
            "(iii)": by["(iii)(a)"] and by["(iii)(b)"],
            "(iv)": by["(iv)(a)"] and by["(iv)(b)"],
            "transported": transported.is_twin,
        },
        degenerate=base.degenerate,
        marginal=base.marginal,
    )


def is_delayed_twin_observables(
    o: DiscreteObservable,
    o2: DiscreteObservable,
    psi0: StateVector,
    u: UnitaryEvolution,
    tol: Tolerances | None = None,
) -> TwinVerdict:
    tol = resolve(tol)
    bv = branch_vectors(o, o2, psi0, u)
    return definition_verdict(match(bv, criterion("definition", bv, o2, tol), tol), tol)


def verify_theorem6(
    o: DiscreteObservable,
    o2: DiscreteObservable,
    psi0: StateVector,
    u: UnitaryEvolution,
    tol: Tolerances | None = None,
) -> TwinVerdict:
    return observable_conditions(o, o2, psi0, u, tol)


@dataclass(frozen=True)
class NonselectiveComparison:
    """Nonselective collapse at ``t0`` then evolution, versus evolution then collapse at ``t``."""

    evolved_mixture: MixedState
    late_mixture: MixedState
    weight_pairs: tuple[tuple[int, float, float], ...]
    frobenius_residual: float

    @property
    def max_weight_gap(self) -> float:
        return max((abs(a - b) for _, a, b in self.weight_pairs), default=0.0)


def compare_nonselective(
    o: DiscreteObservable,
    o2: DiscreteObservable,
    psi0: StateVector,
    u: UnitaryEvolution,
    tol: Tolerances | None = None,
    *,
    force: bool = False,
) -> NonselectiveComparison:
    """Build ``U rho_t0 U^dag`` and ``rho_t`` from the Lüders branches and compare them.

    Zero-probability branches are left out of both mixtures.  Without ``force``
    the pair must be delayed twin observables.
    """
    tol = resolve(tol)
    bv = branch_vectors(o, o2, psi0, u)
    matching = match(bv, criterion("definition", bv, o2, tol), tol)
    if not force and not matching.complete:
        raise PreconditionError("observables are not delayed twins in this state")

    def mixture(vectors, probs) -> MixedState:
        comps = [(p, StateVector.normalized(v)) for v, p in zip(vectors, probs) if p > tol.p_min]
        return MixedState(comps, tol=tol)

    # early vectors already carry U, so the early mixture is U rho_t0 U^dag
    evolved = mixture(bv.early, bv.p_early)
    late = mixture(bv.late, bv.p_late)
    weights = tuple((p.m, p.probability, p.probability_late) for p in matching.pairs)
    residual = frob(evolved.density_matrix - late.density_matrix)
    return NonselectiveComparison(evolved, late, weights, residual)


def chain(
    o: DiscreteObservable,
    o2: DiscreteObservable,
    o3: DiscreteObservable,
    psi0: StateVector,
    u1: UnitaryEvolution,
    u2: UnitaryEvolution,
    tol: Tolerances | None = None,
) -> TwinVerdict:
    """Compose two delayed-twin links ``o -> o2`` (by ``u1``) and ``o2 -> o3`` (by ``u2``)."""
    tol = resolve(tol)
    first = is_delayed_twin_observables(o, o2, psi0, u1, tol)
    if not first:
        raise PreconditionError(f"first link is not a delayed twin pair (residual {first.residual:.3e})")
    second = is_delayed_twin_observables(o2, o3, u1.apply(psi0), u2, tol)
    if not second:
        raise PreconditionError(f"second link is not a delayed twin pair (residual {second.residual:.3e})")
    composed = is_delayed_twin_observables(o, o3, psi0, u2 @ u1, tol)
    return TwinVerdict(
        is_twin=composed.is_twin,
        residual=composed.residual,
        per_condition=(
            Condition("link 1", True, first.residual),
            Condition("link 2", True, second.residual),
        ),
        marginal=composed.marginal,
    )
