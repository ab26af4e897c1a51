"""Seeded property sweeps over random and constructed instances.

Each suite draws one instance per trial from ``default_rng(seed + trial)``,
evaluates the definition of twinness alongside every equivalent
characterization, and counts disagreements.  Roughly half the trials are
constructed twins; the rest are random pairs, including hard negatives that
share the probability of a twin but not its collapsed state.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import delayed, events, measurement, observables
from ._version import __version__
from .errors import PreconditionError, TheoremViolation, ValidationError
from .hilbert import DiscreteObservable, EventProjector, StateVector, UnitaryEvolution
from .sampling import (
    haar_matrix,
    haar_unitary,
    orthonormal_complement,
    random_observable,
    random_projector,
    random_projector_in,
    random_state,
)
from .tolerances import Tolerances, resolve

__all__ = ["SUITES", "SweepReport", "run_sweep"]

SUITES = ("theorem1", "theorem3", "corollary1", "theorem5", "theorem7", "proposition1", "measurement")
MIN_DIM, MAX_DIM = 2, 64


@dataclass
class SweepReport:
    suite: str
    dim: int
    trials: int
    seed: int
    instances: int = 0
    counts: dict[str, int] = field(default_factory=dict)
    max_residuals: dict[str, float] = field(default_factory=dict)
    disagreements: list[dict[str, Any]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def exit_code(self) -> int:
        return 0 if not self.disagreements else 1

    def bump(self, key: str, n: int = 1) -> None:
        self.counts[key] = self.counts.get(key, 0) + n

    def residual(self, key: str, value: float) -> None:
        if math.isfinite(value):
            self.max_residuals[key] = max(self.max_residuals.get(key, 0.0), float(value))

    def disagree(self, trial: int, detail: str) -> None:
        self.disagreements.append({"trial": trial, "detail": detail})

    def to_json(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "dim": self.dim,
            "trials": self.trials,
            "seed": self.seed,
            "instances": self.instances,
            "counts": self.counts,
            "max_residuals": self.max_residuals,
            "disagreements": self.disagreements,
            "summary": {"disagreements": len(self.disagreements), "passed": not self.disagreements},
            "provenance": {"seed": self.seed, "tool_version": __version__, "wall_time": self.wall_time},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def human(self) -> str:
        lines = [f"suite {self.suite}: dim={self.dim} trials={self.trials} seed={self.seed} instances={self.instances}"]
        for k in sorted(self.counts):
            lines.append(f"  {k}: {self.counts[k]}")
        for k in sorted(self.max_residuals):
            lines.append(f"  max residual {k}: {self.max_residuals[k]:.3e}")
        for d in self.disagreements[:20]:
            lines.append(f"  DISAGREEMENT trial {d['trial']}: {d['detail']}")
        lines.append("PASS" if not self.disagreements else f"FAIL ({len(self.disagreements)} disagreements)")
        return "\n".join(lines)


# --- instance generators -------------------------------------------------------


def _fixing(psi: StateVector, rng: np.random.Generator) -> np.ndarray:
    """Random unitary that leaves ``psi`` unchanged."""
    v = psi.amplitudes.reshape(-1, 1)
    q = orthonormal_complement(v, psi.dim)
    return v @ v.conj().T + q @ haar_matrix(q.shape[1], rng) @ q.conj().T


def _event_pair(
    dim: int, psi: StateVector, rng: np.random.Generator, tol: Tolerances, constructed: bool
) -> tuple[EventProjector, EventProjector, str]:
    """An event ``E`` and a partner ``F`` in ``psi``, labelled by how ``F`` was made."""
    if constructed and rng.random() < 0.1:
        # E annihilates psi
        comp = orthonormal_complement(psi.amplitudes, dim)
        e = random_projector_in(comp, int(rng.integers(0, comp.shape[1] + 1)), rng)
    else:
        e = random_projector(dim, int(rng.integers(0, dim + 1)), rng)
    if constructed:
        cls = events.twin_class(e, psi, tol)
        return e, cls.sample(int(rng.integers(0, cls.room + 1)), rng), "constructed"
    if rng.random() < 0.5:
        w = _fixing(psi, rng)
        return e, EventProjector(w @ e.matrix @ w.conj().T), "equal-probability"
    return e, random_projector(dim, int(rng.integers(0, dim + 1)), rng), "random"


def _branches(dim: int, rng: np.random.Generator, lo: int = 1, hi: int = 4) -> int:
    return int(rng.integers(min(lo, dim), min(hi, dim) + 1))


def _observable_partner(
    o: DiscreteObservable,
    psi0: StateVector,
    u: UnitaryEvolution | None,
    rng: np.random.Generator,
    tol: Tolerances,
    constructed: bool,
) -> tuple[DiscreteObservable, str]:
    if constructed:
        return observables.sample_twin_observable(o, psi0, rng, u, tol), "constructed"
    dim = o.dim
    if rng.random() < 0.5:
        psi_t = psi0 if u is None else u.apply(psi0)
        w = _fixing(psi_t, rng)
        um = np.eye(dim) if u is None else u.matrix
        moved = [(v, EventProjector(w @ um @ p.matrix @ um.conj().T @ w.conj().T)) for v, p in o.branches]
        return DiscreteObservable(moved), "equal-probability"
    return random_observable(dim, _branches(dim, rng), rng), "random"


# --- suites --------------------------------------------------------------------

Suite = Callable[[SweepReport, int, int, np.random.Generator, Tolerances, dict[str, Any]], None]


def _suite_theorem1(rep: SweepReport, trial: int, dim: int, rng, tol, opts) -> None:
    psi = random_state(dim, rng)
    e, f, kind = _event_pair(dim, psi, rng, tol, constructed=trial % 2 == 0)
    rep.bump(kind)
    t1 = events.verify_theorem1(e, f, psi, tol)
    verdicts = {"(i)": t1.condition_sets["(i)"], "(ii)": t1.condition_sets["(ii)"]}
    pe, pf = e.probability(psi), f.probability(psi)
    if pe > tol.p_min and pf > tol.p_min:
        t2 = events.verify_theorem2(e, f, psi, tol)
        verdicts.update({"thm2 (i)": t2.condition_sets["(i)"], "thm2 (ii)": t2.condition_sets["(ii)"]})
        rep.bump("theorem2 evaluated")
    rep.bump("twins" if t1.is_twin else "non-twins")
    if kind == "constructed":
        rep.residual("constructed definition", t1.residual)
        if not t1.is_twin:
            rep.disagree(trial, f"constructed twin rejected (residual {t1.residual:.3e})")
    bad = sorted(k for k, v in verdicts.items() if v != t1.is_twin)
    if bad:
        rep.disagree(trial, f"{kind}: {bad} disagree with definition={t1.is_twin}")


def _suite_theorem3(rep: SweepReport, trial: int, dim: int, rng, tol, opts) -> None:
    psi = random_state(dim, rng)
    e = random_projector(dim, int(rng.integers(0, dim + 1)), rng)
    cls = events.twin_class(e, psi, tol)
    candidates: list[tuple[str, EventProjector]] = [("self", e), ("minimal", cls.minimal)]
    members = opts.get("members", 25)
    for _ in range(members):
        candidates.append(("member", cls.sample(int(rng.integers(0, cls.room + 1)), rng)))
    for _ in range(opts.get("negatives", members)):
        candidates.append(("random", random_projector(dim, int(rng.integers(0, dim + 1)), rng)))
    rep.bump("candidates", len(candidates))
    for label, cand in candidates:
        structure = events.class_structure(cand, e, psi, tol)
        try:
            inside = events.in_class(cand, e, psi, tol)
        except TheoremViolation as exc:
            rep.disagree(trial, f"{label}: {exc}")
            continue
        rep.bump("members" if inside else "non-members")
        if inside:
            for key in ("hermitian", "idempotent", "kills_psi", "orthogonal_to_minimal", "minimality"):
                rep.residual(key, getattr(structure, key))
        if label != "random" and not inside:
            rep.disagree(trial, f"{label} candidate rejected")
        if inside != structure.holds:
            rep.disagree(trial, f"{label}: membership {inside} but structure {structure.holds}")


def _suite_corollary1(rep: SweepReport, trial: int, dim: int, rng, tol, opts) -> None:
    psi = random_state(dim, rng)
    o = random_observable(dim, _branches(dim, rng), rng)
    o2, kind = _observable_partner(o, psi, None, rng, tol, constructed=trial % 2 == 0)
    rep.bump(kind)
    v = observables.verify_corollary1(o, o2, psi, tol)
    rep.bump("twins" if v.is_twin else "non-twins")
    if kind == "constructed":
        rep.residual("constructed definition", v.residual)
        if not v.is_twin:
            rep.disagree(trial, f"constructed twin rejected (residual {v.residual:.3e})")
    if not v.consistent:
        rep.disagree(trial, f"{kind}: condition sets {v.condition_sets} vs definition {v.is_twin}")


def _suite_theorem5(rep: SweepReport, trial: int, dim: int, rng, tol, opts) -> None:
    psi0 = random_state(dim, rng)
    u = haar_unitary(dim, rng)
    psi_t = u.apply(psi0)
    e = random_projector(dim, int(rng.integers(1, dim + 1)), rng)
    moved = u.conjugate(e)
    kind = "constructed" if trial % 2 == 0 else ("equal-probability" if rng.random() < 0.5 else "random")
    if kind == "constructed":
        cls = events.twin_class(moved, psi_t, tol)
        f = cls.sample(int(rng.integers(0, cls.room + 1)), rng)
    elif kind == "equal-probability":
        w = _fixing(psi_t, rng)
        f = EventProjector(w @ moved.matrix @ w.conj().T)
    else:
        f = random_projector(dim, int(rng.integers(0, dim + 1)), rng)
    rep.bump(kind)
    try:
        v = delayed.verify_theorem5(e, f, psi0, u, tol)
    except PreconditionError:
        rep.bump("skipped (negligible probability)")
        return
    rep.bump("twins" if v.is_twin else "non-twins")
    if kind == "constructed":
        rep.residual("constructed definition", v.residual)
        if not v.is_twin:
            rep.disagree(trial, f"constructed delayed twin rejected (residual {v.residual:.3e})")
    if not v.consistent:
        rep.disagree(trial, f"{kind}: condition sets {v.condition_sets} vs definition {v.is_twin}")


def _suite_theorem7(rep: SweepReport, trial: int, dim: int, rng, tol, opts) -> None:
    psi0 = random_state(dim, rng)
    u = haar_unitary(dim, rng)
    o = random_observable(dim, _branches(dim, rng, 2, 4), rng)
    o2 = observables.sample_twin_observable(o, psi0, rng, u, tol)
    cmp = delayed.compare_nonselective(o, o2, psi0, u, tol)
    rep.residual("frobenius", cmp.frobenius_residual)
    rep.residual("weight gap", cmp.max_weight_gap)
    rep.bump(f"{len(o)} branches")
    if cmp.frobenius_residual > tol.norm or cmp.max_weight_gap > tol.norm:
        rep.disagree(
            trial, f"mixtures differ: frobenius {cmp.frobenius_residual:.3e}, weights {cmp.max_weight_gap:.3e}"
        )


def _suite_proposition1(rep: SweepReport, trial: int, dim: int, rng, tol, opts) -> None:
    psi0 = random_state(dim, rng)
    u = haar_unitary(dim, rng)
    e = random_projector(dim, int(rng.integers(0, dim + 1)), rng)
    r = delayed.verify_proposition1(e, psi0, u, samples=opts.get("samples", 10), seed=rng, tol=tol)
    rep.residual("transport", r.max_residual)
    if not r.holds:
        rep.disagree(trial, f"class transport residual {r.max_residual:.3e}")


def _suite_measurement(rep: SweepReport, trial: int, dim: int, rng, tol, opts) -> None:
    dim_a = min(dim, 4)
    n = _branches(dim_a, rng, 2, 4)
    dim_b = int(rng.integers(n, 5))
    o = random_observable(dim_a, n, rng)
    scheme = measurement.build_nondemolition_premeasurement(o, dim_b)
    demolition = measurement.build_demolition_premeasurement(o, dim_b)
    rep.bump(f"{n} branches")
    checks = {
        "calibration": measurement.check_calibration(scheme, tol=tol),
        "nondemolition": measurement.check_nondemolition(scheme, tol),
        "demolition calibration": measurement.check_calibration(demolition, tol=tol),
    }
    for i in range(opts.get("inputs", 5)):
        psi_a = random_state(dim_a, rng)
        checks[f"reproducibility #{i}"] = measurement.check_probability_reproducibility(scheme, psi_a, tol)
        checks[f"branch relation #{i}"] = measurement.check_branch_relation(scheme, psi_a, tol)
        checks[f"demolition branch relation #{i}"] = measurement.check_branch_relation(demolition, psi_a, tol)
        twins = measurement.measured_pointer_delayed_twins(scheme, psi_a, tol)
        rep.residual("delayed twins", twins.residual)
        if not twins:
            rep.disagree(trial, f"measured and pointer not delayed twins (residual {twins.residual:.3e})")
    for name, v in checks.items():
        rep.residual(name.split(" #")[0], v.residual)
        if not v.holds:
            rep.disagree(trial, f"{name} failed (residual {v.residual:.3e})")
    if measurement.check_nondemolition(demolition, tol).holds:
        rep.disagree(trial, "demolition scheme preserved every measured value")


_SUITES: dict[str, Suite] = {
    "theorem1": _suite_theorem1,
    "theorem3": _suite_theorem3,
    "corollary1": _suite_corollary1,
    "theorem5": _suite_theorem5,
    "theorem7": _suite_theorem7,
    "proposition1": _suite_proposition1,
    "measurement": _suite_measurement,
}


def run_sweep(
    suite: str, dim: int, trials: int, seed: int, tol: Tolerances | None = None, **options: Any
) -> SweepReport:
    """Run ``trials`` seeded instances of ``suite`` at dimension ``dim``.

    Options: ``members`` and ``negatives`` (theorem3 sampled class members and
    random candidates per instance), ``samples``
    (proposition1 class samples), ``inputs`` (measurement random inputs).
    """
    if suite not in _SUITES:
        raise ValidationError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if not MIN_DIM <= dim <= MAX_DIM:
        raise ValidationError(f"dim must lie in [{MIN_DIM}, {MAX_DIM}], got {dim}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    tol = resolve(tol)
    rep = SweepReport(suite, dim, trials, seed)
    fn = _SUITES[suite]
    start = time.perf_counter()
    for trial in range(trials):
        rng = np.random.default_rng(seed + trial)
        rep.instances += 1
        fn(rep, trial, dim, rng, tol, options)
    rep.wall_time = time.perf_counter() - start
    return rep
