"""Common-index matching of positive-probability branches of two observables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import DimensionError
from .hilbert import DiscreteObservable, StateVector, UnitaryEvolution
from .tolerances import Tolerances, is_marginal
from .verdict import TwinVerdict

Criterion = Literal["definition", "luders", "certainty"]


@dataclass(frozen=True)
class MatchedPair:
    m: int
    k: int
    l: int
    probability: float
    probability_late: float
    residual: float


@dataclass(frozen=True)
class EigenMatching:
    pairs: tuple[MatchedPair, ...]
    unmatched_positive: tuple[tuple[str, int, float], ...]
    unmatched_residuals: tuple[float, ...] = ()

    @property
    def complete(self) -> bool:
        return not self.unmatched_positive

    @property
    def residual(self) -> float:
        return max([p.residual for p in self.pairs] + list(self.unmatched_residuals), default=0.0)


@dataclass(frozen=True)
class Branches:
    """Per-branch vectors: ``early[k] = U E_k psi0`` and ``late[l] = F_l U psi0``."""

    early: list[np.ndarray]
    late: list[np.ndarray]
    p_early: list[float]
    p_late: list[float]


def branch_vectors(
    o: DiscreteObservable, o2: DiscreteObservable, psi0: StateVector, u: UnitaryEvolution | None
) -> Branches:
    dims = {o.dim, o2.dim, psi0.dim} | ({u.dim} if u is not None else set())
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    v0 = psi0.amplitudes
    um = np.eye(psi0.dim) if u is None else u.matrix
    vt = um @ v0
    early, p_early = [], []
    for e in o.projectors:
        ev = e.matrix @ v0
        early.append(um @ ev)
        p_early.append(float(np.vdot(v0, ev).real))
    late, p_late = [], []
    for f in o2.projectors:
        fv = f.matrix @ vt
        late.append(fv)
        p_late.append(float(np.vdot(vt, fv).real))
    return Branches(early, late, p_early, p_late)


def criterion(
    kind: Criterion, bv: Branches, o2: DiscreteObservable, tol: Tolerances
) -> Callable[[int, int], tuple[bool, float]]:
    if kind == "definition":

        def test(k: int, l: int) -> tuple[bool, float]:
            r = float(np.linalg.norm(bv.early[k] - bv.late[l]))
            return r <= tol.op, r

    elif kind == "luders":

        def test(k: int, l: int) -> tuple[bool, float]:
            gap = abs(bv.p_early[k] - bv.p_late[l])
            a, b = bv.early[k], bv.late[l]
            na, nb = np.linalg.norm(a), np.linalg.norm(b)
            if na <= tol.amp_min or nb <= tol.amp_min:
                return False, 1.0
            r = float(np.linalg.norm(a / na - b / nb))
            return gap <= tol.prob and r <= tol.op, max(gap, r)

    elif kind == "certainty":

        def test(k: int, l: int) -> tuple[bool, float]:
            a = bv.early[k]
            na = np.linalg.norm(a)
            if na <= tol.amp_min:
                return False, 1.0
            phi = a / na
            r = float(np.linalg.norm(phi - o2.projectors[l].matrix @ phi))
            return r <= tol.op, r

    else:
        raise ValueError(f"unknown criterion {kind!r}")
    return test


def match(bv: Branches, test: Callable[[int, int], tuple[bool, float]], tol: Tolerances) -> EigenMatching:
    pos_k = [k for k, p in enumerate(bv.p_early) if p > tol.p_min]
    pos_l = [l for l, p in enumerate(bv.p_late) if p > tol.p_min]
    used: set[int] = set()
    pairs: list[MatchedPair] = []
    unmatched: list[tuple[str, int, float]] = []
    unmatched_res: list[float] = []
    for k in pos_k:
        best: tuple[float, int] | None = None
        for l in pos_l:
            if l in used:
                continue
            ok, r = test(k, l)
            if ok and (best is None or r < best[0]):
                best = (r, l)
        if best is None:
            unmatched.append(("early", k, bv.p_early[k]))
            unmatched_res.append(min(test(k, l)[1] for l in range(len(bv.late))))
            continue
        r, l = best
        used.add(l)
        pairs.append(MatchedPair(len(pairs), k, l, bv.p_early[k], bv.p_late[l], r))
    for l in pos_l:
        if l not in used:
            unmatched.append(("late", l, bv.p_late[l]))
            unmatched_res.append(min(test(k, l)[1] for k in range(len(bv.early))))
    return EigenMatching(tuple(pairs), tuple(unmatched), tuple(unmatched_res))


def definition_verdict(matching: EigenMatching, tol: Tolerances) -> TwinVerdict:
    residual = matching.residual
    return TwinVerdict(
        is_twin=matching.complete,
        residual=residual,
        marginal=is_marginal(residual, tol.op),
    )
