"""Simultaneous twin events in a pure state.

Two events ``E`` and ``F`` are twins in ``psi`` when ``E psi == F psi``.  The
functions here evaluate that definition together with its equivalent
characterizations (opposite events, probability plus Lüders state, certainty
statements) and construct the full twin class of an event.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, PreconditionError, TheoremViolation
from .hilbert import EventProjector, StateVector, frob
from .sampling import SeedLike, orthonormal_complement, random_projector_in
from .tolerances import Tolerances, is_marginal, resolve
from .verdict import Condition, TwinVerdict

__all__ = [
    "is_certain",
    "certainty_residual",
    "is_twin",
    "verify_theorem1",
    "verify_theorem2",
    "minimal_twin",
    "TwinClassDescriptor",
    "twin_class",
    "ClassStructure",
    "class_structure",
    "in_class",
    "sample_twin",
]


def _dims(*objs) -> None:
    dims = {o.dim for o in objs}
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")


def _unit(v: np.ndarray, tol: Tolerances) -> np.ndarray | None:
    n = np.linalg.norm(v)
    return v / n if n > tol.amp_min else None


def certainty_residual(event: EventProjector, phi: np.ndarray | StateVector) -> float:
    """``|phi - P phi|``; zero exactly when ``P`` is certain in ``phi``."""
    v = phi.amplitudes if isinstance(phi, StateVector) else phi
    return float(np.linalg.norm(v - event.matrix @ v))


def is_certain(event: EventProjector, phi: StateVector, tol: Tolerances | None = None) -> bool:
    """An event has probability one in ``phi`` iff ``P phi == phi``."""
    tol = resolve(tol)
    _dims(event, phi)
    return certainty_residual(event, phi) <= tol.op


def is_twin(
    e: EventProjector, f: EventProjector, psi: StateVector, tol: Tolerances | None = None
) -> TwinVerdict:
    tol = resolve(tol)
    _dims(e, f, psi)
    ev, fv = e.matrix @ psi.amplitudes, f.matrix @ psi.amplitudes
    residual = float(np.linalg.norm(ev - fv))
    twin = residual <= tol.op
    return TwinVerdict(
        is_twin=twin,
        residual=residual,
        degenerate=twin and np.linalg.norm(ev) <= tol.amp_min,
        marginal=is_marginal(residual, tol.op),
    )


def _luders_residual(
    a: np.ndarray, b: np.ndarray, tol: Tolerances
) -> tuple[bool, float, bool]:
    """Compare the normalized versions of ``a`` and ``b``: (holds, residual, vacuous).

    Both negligible counts as vacuously equal; exactly one negligible fails.
    """
    ua, ub = _unit(a, tol), _unit(b, tol)
    if ua is None and ub is None:
        return True, 0.0, True
    if ua is None or ub is None:
        return False, 1.0, False
    r = float(np.linalg.norm(ua - ub))
    return r <= tol.op, r, False


def verify_theorem1(
    e: EventProjector, f: EventProjector, psi: StateVector, tol: Tolerances | None = None
) -> TwinVerdict:
    """Twin test via the opposite events, and via equal probability plus equal Lüders state."""
    tol = resolve(tol)
    base = is_twin(e, f, psi, tol)
    v = psi.amplitudes
    ev, fv = e.matrix @ v, f.matrix @ v

    r_i = float(np.linalg.norm((v - ev) - (v - fv)))
    pe, pf = float(np.vdot(v, ev).real), float(np.vdot(v, fv).real)
    r_iia = abs(pe - pf)
    iib, r_iib, vac = _luders_residual(ev, fv, tol)

    conds = (
        Condition("(i)", r_i <= tol.op, r_i),
        Condition("(ii)(a)", r_iia <= tol.prob, r_iia),
        Condition("(ii)(b)", iib, r_iib, vacuous=vac),
    )
    return TwinVerdict(
        is_twin=base.is_twin,
        residual=base.residual,
        per_condition=conds,
        condition_sets={"(i)": conds[0].holds, "(ii)": conds[1].holds and conds[2].holds},
        degenerate=base.degenerate,
        marginal=base.marginal,
    )


def verify_theorem2(
    e: EventProjector, f: EventProjector, psi: StateVector, tol: Tolerances | None = None
) -> TwinVerdict:
    """Twin test via certainty of one event after ideal occurrence of the other.

    Only defined when both events have positive probability in ``psi``.
    """
    tol = resolve(tol)
    base = is_twin(e, f, psi, tol)
    v = psi.amplitudes
    ev, fv = e.matrix @ v, f.matrix @ v
    pe, pf = float(np.vdot(v, ev).real), float(np.vdot(v, fv).real)
    if pe <= tol.p_min or pf <= tol.p_min:
        raise PreconditionError(f"both events need positive probability (got {pe:.3e}, {pf:.3e})")

    phi_e, phi_f = ev / np.sqrt(pe), fv / np.sqrt(pf)
    r_ia = certainty_residual(f, phi_e)
    r_ib = certainty_residual(e, phi_f)
    r_ic = float(np.linalg.norm(e.matrix @ fv - f.matrix @ ev))

    ec = v - ev
    chi = _unit(ec, tol)
    if chi is None:
        iib = Condition("(ii)(b)", True, 0.0, vacuous=True)
    else:
        r = float(np.linalg.norm(f.matrix @ chi))  # |chi - F^c chi| = |F chi|
        iib = Condition("(ii)(b)", r <= tol.op, r)

    conds = (
        Condition("(i)(a)", r_ia <= tol.op, r_ia),
        Condition("(i)(b)", r_ib <= tol.op, r_ib),
        Condition("(i)(c)", r_ic <= tol.op, r_ic),
        Condition("(ii)(a)", r_ia <= tol.op, r_ia),
        iib,
    )
    return TwinVerdict(
        is_twin=base.is_twin,
        residual=base.residual,
        per_condition=conds,
        condition_sets={
            "(i)": all(c.holds for c in conds[:3]),
            "(ii)": conds[3].holds and conds[4].holds,
        },
        degenerate=base.degenerate,
        marginal=base.marginal,
    )


def minimal_twin(e: EventProjector, psi: StateVector, tol: Tolerances | None = None) -> EventProjector:
    """Smallest member of the twin class of ``e``: the projector onto ``E psi`` (or zero)."""
    tol = resolve(tol)
    _dims(e, psi)
    ev = e.matrix @ psi.amplitudes
    if np.linalg.norm(ev) <= tol.amp_min:
        return EventProjector.zero(e.dim)
    return EventProjector.onto(ev)


@dataclass(frozen=True)
class TwinClassDescriptor:
    """Twin class of an event in ``psi``: every member is ``minimal + Ebar``.

    ``Ebar`` ranges over projectors orthogonal to ``forbidden_subspace``, the
    span of the minimal twin's range and ``psi``.
    """

    minimal: EventProjector
    forbidden_subspace: np.ndarray
    ambient_dim: int

    @property
    def room(self) -> int:
        """Largest admissible rank of ``Ebar``."""
        return self.ambient_dim - self.forbidden_subspace.shape[1]

    def sample(self, rank_bar: int, seed: SeedLike = None) -> EventProjector:
        if not 0 <= rank_bar <= self.room:
            raise PreconditionError(f"rank_bar {rank_bar} exceeds available room {self.room}")
        if rank_bar == 0:
            return self.minimal
        free = orthonormal_complement(self.forbidden_subspace, self.ambient_dim)
        extra = random_projector_in(free, rank_bar, seed)
        return EventProjector(self.minimal.matrix + extra.matrix)


def twin_class(e: EventProjector, psi: StateVector, tol: Tolerances | None = None) -> TwinClassDescriptor:
    tol = resolve(tol)
    e0 = minimal_twin(e, psi, tol)
    cols = np.column_stack([psi.amplitudes, *(e0.range_basis.T)])
    forbidden = scipy.linalg.orth(cols, rcond=1e-12)
    return TwinClassDescriptor(minimal=e0, forbidden_subspace=forbidden, ambient_dim=e.dim)


def sample_twin(
    e: EventProjector,
    psi: StateVector,
    rank_bar: int,
    seed: SeedLike = None,
    tol: Tolerances | None = None,
) -> EventProjector:
    """Random member ``E0 + Ebar`` of the twin class of ``e`` with ``rank(Ebar) == rank_bar``."""
    return twin_class(e, psi, tol).sample(rank_bar, seed)


@dataclass(frozen=True)
class ClassStructure:
    """Residuals of the decomposition ``E' = E0 + D`` with ``D`` a projector orthogonal to ``E0`` and ``psi``."""

    hermitian: float
    idempotent: float
    kills_psi: float
    orthogonal_to_minimal: float
    minimality: float
    tolerance: float

    @property
    def decomposes(self) -> bool:
        return max(self.hermitian, self.idempotent, self.kills_psi, self.orthogonal_to_minimal) <= self.tolerance

    @property
    def holds(self) -> bool:
        return self.decomposes and self.minimality <= self.tolerance

    @property
    def worst(self) -> float:
        return max(self.hermitian, self.idempotent, self.kills_psi, self.orthogonal_to_minimal, self.minimality)


def class_structure(
    e_prime: EventProjector, e: EventProjector, psi: StateVector, tol: Tolerances | None = None
) -> ClassStructure:
    tol = resolve(tol)
    _dims(e_prime, e, psi)
    e0 = minimal_twin(e, psi, tol).matrix
    d = e_prime.matrix - e0
    return ClassStructure(
        hermitian=frob(d - d.conj().T),
        idempotent=frob(d @ d - d),
        kills_psi=float(np.linalg.norm(d @ psi.amplitudes)),
        orthogonal_to_minimal=frob(d @ e0),
        minimality=frob(e_prime.matrix @ e0 - e0),
        tolerance=tol.op,
    )


def in_class(
    e_prime: EventProjector, e: EventProjector, psi: StateVector, tol: Tolerances | None = None
) -> bool:
    """Membership of ``e_prime`` in the twin class of ``e``.

    Members must also decompose as ``E0 + D``; a member that does not raises
    ``TheoremViolation``.  The structural tolerance is widened by
    ``2 / |E psi|`` because normalizing ``E psi`` amplifies the residual.
    """
    tol = resolve(tol)
    verdict = is_twin(e_prime, e, psi, tol)
    if not verdict.is_twin:
        return False
    structure = class_structure(e_prime, e, psi, tol)
    amp = float(np.linalg.norm(e.matrix @ psi.amplitudes))
    slack = tol.op * max(1.0, 2.0 / amp) if amp > tol.amp_min else tol.op
    if structure.worst > slack:
        raise TheoremViolation(f"twin {e_prime!r} does not decompose as E0 + D (worst residual {structure.worst:.3e})")
    return True
