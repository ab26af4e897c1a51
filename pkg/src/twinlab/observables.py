"""Twin observables: branchwise twin eigenprojectors under a common index.

Matching works for the simultaneous case and, given an evolution ``U``, for
the delayed case; the simultaneous case is the delayed one with ``U = I``.
"""

from __future__ import annotations

import numpy as np

from ._matching import (
    Criterion,
    EigenMatching,
    MatchedPair,
    branch_vectors,
    criterion as make_criterion,
    definition_verdict,
    match,
)
from .hilbert import DiscreteObservable, EventProjector, StateVector, UnitaryEvolution
from .sampling import SeedLike, haar_matrix, orthonormal_complement, rng_from
from .tolerances import Tolerances, resolve
from .verdict import Condition, TwinVerdict

__all__ = [
    "MatchedPair",
    "EigenMatching",
    "match_branches",
    "match_eigenprojectors",
    "is_twin_observables",
    "observable_conditions",
    "verify_corollary1",
    "sample_twin_observable",
]


def match_branches(
    o: DiscreteObservable,
    o2: DiscreteObservable,
    psi0: StateVector,
    evolution: UnitaryEvolution | None = None,
    criterion: Criterion = "definition",
    tol: Tolerances | None = None,
) -> EigenMatching:
    """Common-index matching of positive-probability branches under ``criterion``.

    ``definition``: ``U E_k psi0 == F_l U psi0``; ``luders``: equal probabilities
    and equal collapsed states after the delay; ``certainty``: ``F_l`` certain in
    the delayed collapsed state ``U E_k psi0 / |E_k psi0|``.
    """
    tol = resolve(tol)
    bv = branch_vectors(o, o2, psi0, evolution)
    return match(bv, make_criterion(criterion, bv, o2, tol), tol)


def match_eigenprojectors(
    o: DiscreteObservable, o2: DiscreteObservable, psi: StateVector, tol: Tolerances | None = None
) -> EigenMatching:
    return match_branches(o, o2, psi, None, "definition", tol)


def is_twin_observables(
    o: DiscreteObservable, o2: DiscreteObservable, psi: StateVector, tol: Tolerances | None = None
) -> TwinVerdict:
    tol = resolve(tol)
    return definition_verdict(match_eigenprojectors(o, o2, psi, tol), tol)


def observable_conditions(
    o: DiscreteObservable,
    o2: DiscreteObservable,
    psi0: StateVector,
    evolution: UnitaryEvolution | None,
    tol: Tolerances | None = None,
) -> TwinVerdict:
    """Definition plus the two alternative characterizations, each with its own matching.

    (i)(a)/(ii)(a) record whether a common renumeration exists under the
    respective pairing criterion; (i)(b), (i)(c), (ii)(b) hold only if that
    renumeration exists and every matched pair meets the condition.
    """
    tol = resolve(tol)
    bv = branch_vectors(o, o2, psi0, evolution)
    base = definition_verdict(match(bv, make_criterion("definition", bv, o2, tol), tol), tol)

    m1 = match(bv, make_criterion("luders", bv, o2, tol), tol)
    gaps, states = [0.0], [0.0]
    for p in m1.pairs:
        a, b = bv.early[p.k], bv.late[p.l]
        gaps.append(abs(p.probability - p.probability_late))
        states.append(float(np.linalg.norm(a / np.linalg.norm(a) - b / np.linalg.norm(b))))
    i_a = Condition("(i)(a)", m1.complete, float(len(m1.unmatched_positive)))
    i_b = Condition("(i)(b)", m1.complete and max(gaps) <= tol.prob, max(gaps))
    i_c = Condition("(i)(c)", m1.complete and max(states) <= tol.op, max(states))

    m2 = match(bv, make_criterion("certainty", bv, o2, tol), tol)
    cert = max([p.residual for p in m2.pairs] + list(m2.unmatched_residuals), default=0.0)
    ii_a = Condition("(ii)(a)", m2.complete, float(len(m2.unmatched_positive)))
    ii_b = Condition("(ii)(b)", m2.complete and cert <= tol.op, cert)

    conds = (i_a, i_b, i_c, ii_a, ii_b)
    return TwinVerdict(
        is_twin=base.is_twin,
        residual=base.residual,
        per_condition=conds,
        condition_sets={
            "(i)": i_a.holds and i_b.holds and i_c.holds,
            "(ii)": ii_a.holds and ii_b.holds,
        },
        marginal=base.marginal,
    )


def verify_corollary1(
    o: DiscreteObservable, o2: DiscreteObservable, psi: StateVector, tol: Tolerances | None = None
) -> TwinVerdict:
    return observable_conditions(o, o2, psi, None, tol)


def sample_twin_observable(
    o: DiscreteObservable,
    psi0: StateVector,
    seed: SeedLike = None,
    evolution: UnitaryEvolution | None = None,
    tol: Tolerances | None = None,
) -> DiscreteObservable:
    """Random (delayed) twin of ``o``.

    Each positive-probability branch ``k`` becomes ``F_k = |phi_k><phi_k| + Ebar_k``
    with ``phi_k`` the normalized ``U E_k psi0``.  The ``Ebar_k`` take disjoint random
    pieces of the complement of ``span{phi_k}``; whatever is left over forms one
    extra zero-probability branch.
    """
    tol = resolve(tol)
    rng = rng_from(seed)
    bv = branch_vectors(o, o, psi0, evolution)
    dim = psi0.dim
    phis = [a / np.sqrt(p) for a, p in zip(bv.early, bv.p_early) if p > tol.p_min]
    free = orthonormal_complement(np.column_stack(phis), dim)
    if free.shape[1]:
        free = free @ haar_matrix(free.shape[1], rng)
    n_pos = len(phis)
    # slot n_pos is the leftover branch
    owner = rng.integers(0, n_pos + 1, size=free.shape[1])
    mats = [np.outer(phi, phi.conj()) for phi in phis] + [np.zeros((dim, dim), dtype=complex)]
    for col, k in zip(free.T, owner):
        mats[k] = mats[k] + np.outer(col, col.conj())
    if not np.any(owner == n_pos):
        mats.pop()
    values = rng.permutation(len(mats)).astype(float) * 1.5 - 1.0
    return DiscreteObservable((val, EventProjector(m)) for val, m in zip(values, mats))

