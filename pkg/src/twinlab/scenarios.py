"""Built-in worked examples: the singlet pair, a Stern-Gerlach preparation and
the Scully coincidence puzzle.

Each scenario is a scenario file (exportable, checked by the generic runner)
plus a few scenario-specific computations that have no file check type.
Spin values are in units of hbar, so spin-1/2 eigenvalues are +-0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .checks import Outcome, CheckRecord, Report, run_scenario
from .delayed import verify_theorem5
from .errors import ValidationError
from .hilbert import (
    DiscreteObservable,
    EventProjector,
    StateVector,
    UnitaryEvolution,
    frob,
    luders_collapse,
    partial_trace,
    schmidt_decompose,
)
from .sampling import haar_matrix
from .scenario_file import CheckSpec, ObservableSpec, ScenarioFile
from .tolerances import Tolerances, is_marginal, resolve

__all__ = [
    "Scenario",
    "SCENARIOS",
    "singlet_scenario",
    "stern_gerlach_scenario",
    "scully_scenario",
    "scully_coincidences",
    "get_scenario",
    "run_demo",
]

Extra = Callable[[Tolerances], Outcome]


@dataclass
class Scenario:
    """A scenario file plus extra named computations that are not file checks."""

    file: ScenarioFile
    evolution: UnitaryEvolution | None = None
    extras: dict[str, Extra] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.file.name

    @property
    def dim(self) -> int:
        return self.file.dimension

    @property
    def psi0(self) -> StateVector:
        return self.file.state

    @property
    def expected(self) -> list[tuple[str, bool]]:
        out = [(c.name, True if c.expect is None else c.expect) for c in self.file.checks]
        return out + [(name, True) for name in self.extras]

    def run(self, tol: Tolerances | None = None, overrides: dict[str, float] | None = None) -> Report:
        tol = resolve(tol)
        report = run_scenario(self.file, tol, overrides)
        eff = Tolerances.from_mapping(self.file.tolerances, tol)
        eff = Tolerances.from_mapping({k: v for k, v in (overrides or {}).items() if v is not None}, eff)
        for name, fn in self.extras.items():
            out = fn(eff)
            report.records.append(
                CheckRecord(
                    name=name,
                    type="scenario",
                    verdict=bool(out.verdict),
                    expected=True,
                    matched=bool(out.verdict),
                    residuals=dict(out.residuals),
                    tolerances_used=eff.as_dict(),
                    marginal_flags=dict(out.marginal),
                )
            )
        return report


def _outcome(holds: bool, residuals: dict[str, float], threshold: float) -> Outcome:
    res = {k: float(v) for k, v in residuals.items()}
    return Outcome(holds, res, {k: is_marginal(v, threshold) for k, v in res.items()})


def _ket(dim: int, *indices: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[list(indices)] = 1.0
    return v


def _proj(dim: int, *indices: int) -> np.ndarray:
    v = np.zeros(dim)
    v[list(indices)] = 1.0
    return np.diag(v).astype(complex)


# --- singlet -------------------------------------------------------------------


def singlet_scenario() -> Scenario:
    """Two spin-1/2 particles in the singlet state; basis ``|+>, |->`` per particle.

    ``s_A^z (x) I`` and ``-I (x) s_B^z`` are twin observables: the ``+0.5``
    branches are ``|+><+| (x) I`` and ``I (x) |-><-|``.
    """
    up, down = _proj(2, 0), _proj(2, 1)
    eye = np.eye(2, dtype=complex)
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    psi = StateVector((_ket(4, 1) - _ket(4, 2)) / math.sqrt(2))
    ops = {
        "E_A_up": np.kron(up, eye),
        "E_A_down": np.kron(down, eye),
        "F_B_down": np.kron(eye, down),
        "F_B_up": np.kron(eye, up),
        "sx_B": np.kron(eye, sx),
    }
    obs = {
        "sz_A": ObservableSpec(values=(0.5, -0.5), projectors=("E_A_up", "E_A_down")),
        "minus_sz_B": ObservableSpec(values=(0.5, -0.5), projectors=("F_B_down", "F_B_up")),
        "sx_B": ObservableSpec(hermitian="sx_B"),
    }
    checks = [
        CheckSpec("simultaneous_twin", {"E": "E_A_up", "F": "F_B_down"}, "up_A twins down_B", True),
        CheckSpec("simultaneous_twin", {"E": "E_A_up", "F": "F_B_up"}, "up_A does not twin up_B", False),
        CheckSpec("theorem1", {"E": "E_A_up", "F": "F_B_down"}, "opposite events and Lueders states", True),
        CheckSpec("theorem2", {"E": "E_A_up", "F": "F_B_down"}, "certainty after occurrence", True),
        CheckSpec("class_membership", {"E": "E_A_up", "E_prime": "F_B_down"}, "down_B in class of up_A", True),
        CheckSpec("twin_observables", {"O": "sz_A", "O_prime": "minus_sz_B"}, "s_A^z twins -s_B^z", True),
        CheckSpec("corollary1", {"O": "sz_A", "O_prime": "minus_sz_B"}, "observable characterizations", True),
        CheckSpec("twin_observables", {"O": "sz_A", "O_prime": "sx_B"}, "s_A^z does not twin s_B^x", False),
    ]
    file = ScenarioFile(
        dimension=4, state=psi, checks=checks, name="singlet", operators=ops, observables=obs
    )
    sz_a = DiscreteObservable(zip((0.5, -0.5), (EventProjector(ops["E_A_up"]), EventProjector(ops["E_A_down"]))))
    sz_b = np.kron(eye, np.diag([0.5, -0.5]).astype(complex))

    def product_branches(tol: Tolerances) -> Outcome:
        # each Lueders branch is a product of sz eigenvectors on both sides
        res = {}
        for value, e in sz_a.branches:
            _, phi = luders_collapse(psi, e, tol)
            s, _, _ = schmidt_decompose(phi, (2, 2))
            v = phi.amplitudes
            res[f"{value:+.1f} schmidt_tail"] = float(s[1])
            res[f"{value:+.1f} eigen_A"] = float(np.linalg.norm(sz_a.matrix @ v - value * v))
            res[f"{value:+.1f} eigen_B"] = float(np.linalg.norm(sz_b @ v + value * v))
        return _outcome(max(res.values()) <= tol.op, res, tol.op)

    def probabilities(tol: Tolerances) -> Outcome:
        res = {f"p({v:+.1f})": abs(e.probability(psi) - 0.5) for v, e in sz_a.branches}
        return _outcome(max(res.values()) <= tol.prob, res, tol.prob)

    def canonical(tol: Tolerances) -> Outcome:
        half = np.eye(2) / 2
        rho_a = partial_trace(psi, (2, 2), "A", tol)
        rho_b = partial_trace(psi, (2, 2), "B", tol)
        s, _, _ = schmidt_decompose(psi, (2, 2))
        res = {
            "rho_A - I/2": frob(rho_a - half),
            "rho_B - I/2": frob(rho_b - half),
            "coeff^2 vs eig(rho_A)": float(np.max(np.abs(np.sort(s**2) - np.linalg.eigvalsh(rho_a)))),
            "coeff^2 vs eig(rho_B)": float(np.max(np.abs(np.sort(s**2) - np.linalg.eigvalsh(rho_b)))),
        }
        return _outcome(max(res.values()) <= tol.op, res, tol.op)

    return Scenario(
        file,
        None,
        {
            "Lueders branches are product eigenvectors": product_branches,
            "branch probabilities 1/2": probabilities,
            "canonical Schmidt form": canonical,
        },
    )


# --- Stern-Gerlach -------------------------------------------------------------

UPPER, LOWER, RIGHT, SCREEN = range(4)


def stern_gerlach_scenario() -> Scenario:
    """Upper path at ``t0`` leads to the right region at ``t``; lower path to the screen."""
    psi = StateVector((_ket(4, UPPER) + _ket(4, LOWER)) / math.sqrt(2))
    perm = np.zeros((4, 4), dtype=complex)
    for src, dst in ((UPPER, RIGHT), (LOWER, SCREEN), (RIGHT, UPPER), (SCREEN, LOWER)):
        perm[dst, src] = 1.0
    u = UnitaryEvolution(perm)
    ops = {
        "E_upper": _proj(4, UPPER),
        "E_lower": _proj(4, LOWER),
        "F_right": _proj(4, RIGHT),
        "F_screen": _proj(4, SCREEN),
    }
    checks = [
        CheckSpec("delayed_twin", {"E": "E_upper", "F": "F_right", "U": "U"}, "upper then right", True),
        CheckSpec("delayed_twin", {"E": "E_upper", "F": "F_screen", "U": "U"}, "upper does not reach screen", False),
        CheckSpec("theorem5", {"E": "E_upper", "F": "F_right", "U": "U"}, "delayed characterizations", True),
        CheckSpec("proposition1", {"E": "E_upper", "U": "U"}, "twin class transport", True),
        CheckSpec(
            "pair_equivalence",
            {"E": "E_upper", "F": "F_right", "E_prime": "E_lower", "F_prime": "F_screen", "U": "U"},
            "upper and lower pairs inequivalent",
            False,
        ),
    ]
    file = ScenarioFile(
        dimension=4, state=psi, checks=checks, name="stern-gerlach", seed=0,
        operators=ops, unitaries={"U": u},
    )
    e, f = EventProjector(ops["E_upper"]), EventProjector(ops["F_right"])

    def condition_iv(tol: Tolerances) -> Outcome:
        v = verify_theorem5(e, f, psi, u, tol)
        res = {"(iv)(a)": v.condition("(iv)(a)").residual, "(iv)(b)": v.condition("(iv)(b)").residual}
        return _outcome(v.condition_sets["(iv)"], res, tol.op)

    def probabilities(tol: Tolerances) -> Outcome:
        res = {"p(E) - 1/2": abs(e.probability(psi) - 0.5), "p(F) - 1/2": abs(f.probability(u.apply(psi)) - 0.5)}
        return _outcome(max(res.values()) <= tol.prob, res, tol.prob)

    def intermediate_collapse(tol: Tolerances) -> Outcome:
        r = intermediate_collapse_residual(e, f, psi, u, tol)
        return _outcome(r <= tol.op, {"collapse then evolve vs evolve then collapse": r}, tol.op)

    return Scenario(
        file,
        u,
        {
            "condition (iv)": condition_iv,
            "probabilities 1/2": probabilities,
            "intermediate collapse leaves the up-going branch": intermediate_collapse,
        },
    )


def intermediate_collapse_residual(
    e: EventProjector, f: EventProjector, psi0: StateVector, u: UnitaryEvolution, tol: Tolerances | None = None
) -> float:
    """``|U (E psi0/|E psi0|) - F U psi0/|F U psi0||``, or ``inf`` if either branch is empty."""
    _, early = luders_collapse(psi0, e, tol)
    _, late = luders_collapse(u.apply(psi0), f, tol)
    if early is None or late is None:
        return math.inf
    return float(np.linalg.norm(u.apply(early).amplitudes - late.amplitudes))


# --- Scully --------------------------------------------------------------------

_LEFT_X = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _scully_parts(theta: float, seed: int) -> tuple[StateVector, DiscreteObservable, UnitaryEvolution]:
    if not (0.0 <= theta <= math.pi / 2) or not math.isfinite(theta):
        raise ValidationError(f"entanglement angle must lie in [0, pi/2], got {theta!r}")
    amps = np.zeros(4, dtype=complex)
    amps[0], amps[3] = math.cos(theta), math.sin(theta)  # |r1 l1>, |r2 l2>
    psi = StateVector(amps)
    eye = np.eye(2, dtype=complex)
    right = DiscreteObservable(
        [(1.0, EventProjector(np.kron(_proj(2, 0), eye))), (2.0, EventProjector(np.kron(_proj(2, 1), eye)))]
    )
    u = UnitaryEvolution(np.kron(eye, haar_matrix(2, seed)))
    return psi, right, u


def scully_scenario(theta: float = math.pi / 4, seed: int = 0) -> Scenario:
    """Right photon read at ``t0``, left photon evolves until ``t``; ``theta`` sets the entanglement."""
    psi, o, u = _scully_parts(theta, seed)
    late = [u.conjugate(p) for p in o.projectors]
    ops = {"R1": o.projectors[0].matrix, "R2": o.projectors[1].matrix, "R1_t": late[0].matrix, "R2_t": late[1].matrix}
    obs = {
        "O": ObservableSpec(values=o.values, projectors=("R1", "R2")),
        "O_prime": ObservableSpec(values=o.values, projectors=("R1_t", "R2_t")),
    }
    args = {"O": "O", "O_prime": "O_prime", "U": "U"}
    checks = [
        CheckSpec("delayed_twin_observables", dict(args), "record read early twins record read late", True),
        CheckSpec("theorem6", dict(args), "delayed observable characterizations", True),
        CheckSpec("theorem7", dict(args), "nonselective collapse commutes with evolution", True),
    ]
    file = ScenarioFile(
        dimension=4, state=psi, checks=checks, name="scully", seed=seed,
        operators=ops, unitaries={"U": u}, observables=obs,
    )

    def coincidences(tol: Tolerances) -> Outcome:
        early, late_table = scully_coincidences(theta, seed)
        r = float(np.max(np.abs(early - late_table)))
        return _outcome(r <= tol.norm, {"max entry gap": r}, tol.norm)

    def weights(tol: Tolerances) -> Outcome:
        early, late_table = scully_coincidences(theta, seed)
        want = np.array([math.cos(theta) ** 2, math.sin(theta) ** 2])
        res = {
            "collapse first": float(np.max(np.abs(early.sum(axis=1) - want))),
            "evolve first": float(np.max(np.abs(late_table.sum(axis=1) - want))),
        }
        return _outcome(max(res.values()) <= tol.norm, res, tol.norm)

    return Scenario(file, u, {"coincidence tables agree": coincidences, "weights cos^2, sin^2": weights})


def scully_coincidences(theta: float, seed: int = 0, left_basis: np.ndarray = _LEFT_X) -> tuple[np.ndarray, np.ndarray]:
    """Joint probabilities ``P(right = k, left = j)`` computed two ways.

    First table: collapse the right photon at ``t0``, evolve each branch, then
    measure the left photon in ``left_basis`` (columns).  Second table: evolve
    the pure state, collapse at ``t`` into a density matrix, then take traces.
    """
    psi, o, u = _scully_parts(theta, seed)
    eye = np.eye(2)
    left = [np.kron(eye, np.outer(c, c.conj())) for c in left_basis.T]

    early = np.zeros((len(o), len(left)))
    for k, e in enumerate(o.projectors):
        w, phi = luders_collapse(psi, e)
        if phi is None:
            continue
        moved = u.matrix @ phi.amplitudes
        for j, q in enumerate(left):
            early[k, j] = w * float(np.vdot(moved, q @ moved).real)

    vt = u.matrix @ psi.amplitudes
    late_ops = [u.conjugate(e).matrix for e in o.projectors]
    rho_t = sum(f @ np.outer(vt, vt.conj()) @ f for f in late_ops)
    late = np.array([[float(np.trace(rho_t @ f @ q).real) for q in left] for f in late_ops])
    return early, late


# --- registry ------------------------------------------------------------------

SCENARIOS = ("singlet", "stern-gerlach", "scully")


def get_scenario(name: str, theta: float | None = None, seed: int = 0) -> Scenario:
    if name == "singlet":
        return singlet_scenario()
    if name == "stern-gerlach":
        return stern_gerlach_scenario()
    if name == "scully":
        return scully_scenario(math.pi / 4 if theta is None else theta, seed)
    raise ValidationError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")


def run_demo(name: str, theta: float | None = None, tol: Tolerances | None = None) -> Report:
    return get_scenario(name, theta).run(tol)
