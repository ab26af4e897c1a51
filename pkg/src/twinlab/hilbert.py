"""Dense finite-dimensional Hilbert-space substrate.

All value types are immutable: their arrays are flagged read-only and every
invariant is checked once, on construction.  Composite systems use row-major
(Kronecker) ordering, so the basis index of ``|i>_A |j>_B`` is ``i * dim_B + j``.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Literal, NamedTuple, Sequence, Union

import numpy as np

from .errors import DimensionError, ValidationError
from .tolerances import Tolerances, resolve

__all__ = [
    "StateVector",
    "EventProjector",
    "Branch",
    "DiscreteObservable",
    "UnitaryEvolution",
    "MixedState",
    "luders_collapse",
    "coherent_decompose",
    "spectral_decompose",
    "tensor",
    "partial_trace",
    "density_matrix",
    "schmidt_decompose",
    "states_equal",
    "frob",
]


def frob(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def _check_dims(*dims: int) -> None:
    if len(set(dims)) > 1:
        raise DimensionError(f"dimension mismatch: {dims}")


def _as_vector(x: Union["StateVector", np.ndarray]) -> np.ndarray:
    return x.amplitudes if isinstance(x, StateVector) else np.asarray(x, dtype=np.complex128)


class StateVector:
    """Unit-norm vector of complex amplitudes."""

    def __init__(self, amplitudes: Iterable[complex] | np.ndarray, *, tol: Tolerances | None = None):
        tol = resolve(tol)
        a = np.asarray(amplitudes, dtype=np.complex128)
        if a.ndim != 1 or a.size < 1:
            raise ValidationError(f"state vector must be a non-empty 1-d array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("state vector has non-finite amplitudes")
        norm_sq = float(np.vdot(a, a).real)
        if abs(norm_sq - 1.0) > tol.norm:
            raise ValidationError(f"state vector not normalized: |psi|^2 = {norm_sq!r}")
        self.amplitudes = _frozen(a)

    @classmethod
    def normalized(cls, amplitudes: Iterable[complex] | np.ndarray) -> StateVector:
        a = np.asarray(amplitudes, dtype=np.complex128)
        n = np.linalg.norm(a)
        if n == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(a / n)

    @classmethod
    def basis(cls, dim: int, index: int) -> StateVector:
        a = np.zeros(dim, dtype=np.complex128)
        a[index] = 1.0
        return cls(a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def inner(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(dim={self.dim})"


class EventProjector:
    """Hermitian idempotent matrix (an event, i.e. a yes/no observable)."""

    def __init__(self, matrix: np.ndarray, *, tol: Tolerances | None = None):
        tol = resolve(tol)
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValidationError(f"projector must be a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("projector has non-finite entries")
        herm = frob(m - m.conj().T)
        if herm > tol.op:
            raise ValidationError(f"projector not Hermitian: |M - M^dag|_F = {herm:.3e}")
        idem = frob(m @ m - m)
        if idem > tol.op:
            raise ValidationError(f"projector not idempotent: |M^2 - M|_F = {idem:.3e}")
        tr = float(np.trace(m).real)
        rank = int(round(tr))
        if abs(tr - rank) > tol.op:
            raise ValidationError(f"projector trace {tr!r} is not an integer")
        self.matrix = _frozen(m)
        self.rank = rank

    @classmethod
    def zero(cls, dim: int) -> EventProjector:
        return cls(np.zeros((dim, dim)))

    @classmethod
    def identity(cls, dim: int) -> EventProjector:
        return cls(np.eye(dim))

    @classmethod
    def onto(cls, vector: StateVector | np.ndarray) -> EventProjector:
        """Rank-one projector onto the direction of ``vector`` (normalized here)."""
        v = _as_vector(vector)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValidationError("cannot project onto the zero vector")
        v = v / n
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_basis(cls, columns: np.ndarray, dim: int | None = None) -> EventProjector:
        """Projector onto the span of orthonormal ``columns`` (shape dim x r)."""
        q = np.asarray(columns, dtype=np.complex128)
        if q.ndim == 1:
            q = q[:, None]
        if q.shape[1] == 0:
            if dim is None:
                dim = q.shape[0]
            return cls.zero(dim)
        return cls(q @ q.conj().T)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def range_basis(self) -> np.ndarray:
        """Orthonormal basis of the range, one column per dimension (deterministic)."""
        w, v = np.linalg.eigh(self.matrix)
        cols = v[:, w > 0.5]
        cols = cols[:, ::-1] if cols.shape[1] else cols
        cols = np.ascontiguousarray(cols)
        cols.setflags(write=False)
        return cols

    def complement(self) -> EventProjector:
        return EventProjector(np.eye(self.dim) - self.matrix)

    def apply(self, vector: StateVector | np.ndarray) -> np.ndarray:
        v = _as_vector(vector)
        _check_dims(self.dim, v.shape[0])
        return self.matrix @ v

    def probability(self, state: StateVector) -> float:
        """Born rule ``<psi|E|psi>``."""
        _check_dims(self.dim, state.dim)
        return float(np.vdot(state.amplitudes, self.matrix @ state.amplitudes).real)

    def __repr__(self) -> str:
        return f"EventProjector(dim={self.dim}, rank={self.rank})"


class Branch(NamedTuple):
    value: float
    projector: EventProjector


class DiscreteObservable:
    """Observable in spectral form: distinct real values paired with orthogonal eigenprojectors."""

    def __init__(
        self,
        branches: Iterable[tuple[float, EventProjector]],
        *,
        tol: Tolerances | None = None,
    ):
        tol = resolve(tol)
        bs = tuple(Branch(float(v), p) for v, p in branches)
        if not bs:
            raise ValidationError("observable needs at least one branch")
        _check_dims(*(b.projector.dim for b in bs))
        dim = bs[0].projector.dim
        for i, bi in enumerate(bs):
            if not np.isfinite(bi.value):
                raise ValidationError(f"eigenvalue {bi.value!r} is not finite")
            for bj in bs[i + 1:]:
                if abs(bi.value - bj.value) <= tol.spec:
                    raise ValidationError(f"eigenvalues {bi.value!r} and {bj.value!r} are not distinct")
                overlap = frob(bi.projector.matrix @ bj.projector.matrix)
                if overlap > tol.op:
                    raise ValidationError(
                        f"eigenprojectors for {bi.value!r} and {bj.value!r} not orthogonal ({overlap:.3e})"
                    )
        total = sum(b.projector.matrix for b in bs)
        gap = frob(total - np.eye(dim))
        if gap > tol.op:
            raise ValidationError(f"eigenprojectors do not resolve the identity ({gap:.3e})")
        self.branches = bs
        self.dim = dim

    @classmethod
    def binary(cls, event: EventProjector, yes: float = 1.0, no: float = 0.0) -> DiscreteObservable:
        """``yes * E + no * (I - E)``, dropping an empty branch."""
        branches = [(yes, event), (no, event.complement())]
        return cls([b for b in branches if b[1].rank > 0])

    @classmethod
    def from_hermitian(cls, h: np.ndarray, tol: Tolerances | None = None) -> DiscreteObservable:
        return spectral_decompose(h, tol=tol)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(b.value for b in self.branches)

    @property
    def projectors(self) -> tuple[EventProjector, ...]:
        return tuple(b.projector for b in self.branches)

    @property
    def matrix(self) -> np.ndarray:
        return sum(b.value * b.projector.matrix for b in self.branches)

    def relabeled(self, values: Sequence[float]) -> DiscreteObservable:
        if len(values) != len(self.branches):
            raise ValidationError("need one new value per branch")
        return DiscreteObservable(zip(values, self.projectors))

    def __len__(self) -> int:
        return len(self.branches)

    def __repr__(self) -> str:
        return f"DiscreteObservable(dim={self.dim}, values={list(self.values)})"


class UnitaryEvolution:
    """Unitary operator ``U(t - t0)``; the inverse is always taken as ``U^dag``."""

    def __init__(self, matrix: np.ndarray, *, tol: Tolerances | None = None):
        tol = resolve(tol)
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValidationError(f"unitary must be a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("unitary has non-finite entries")
        res = frob(m.conj().T @ m - np.eye(m.shape[0]))
        if res > tol.op:
            raise ValidationError(f"matrix not unitary: |U^dag U - I|_F = {res:.3e}")
        self.matrix = _frozen(m)

    @classmethod
    def identity(cls, dim: int) -> UnitaryEvolution:
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dagger(self) -> UnitaryEvolution:
        return UnitaryEvolution(self.matrix.conj().T)

    def apply(self, state: StateVector) -> StateVector:
        _check_dims(self.dim, state.dim)
        return StateVector.normalized(self.matrix @ state.amplitudes)

    def conjugate(self, event: EventProjector) -> EventProjector:
        """``U E U^dag``: the event transported forward by the evolution."""
        _check_dims(self.dim, event.dim)
        return EventProjector(self.matrix @ event.matrix @ self.matrix.conj().T)

    def __matmul__(self, other: UnitaryEvolution) -> UnitaryEvolution:
        _check_dims(self.dim, other.dim)
        return UnitaryEvolution(self.matrix @ other.matrix)

    def __repr__(self) -> str:
        return f"UnitaryEvolution(dim={self.dim})"


class MixedState:
    """Convex mixture of pure states."""

    def __init__(self, components: Iterable[tuple[float, StateVector]], *, tol: Tolerances | None = None):
        tol = resolve(tol)
        comps = tuple((float(w), s) for w, s in components)
        if not comps:
            raise ValidationError("mixture needs at least one component")
        _check_dims(*(s.dim for _, s in comps))
        if any(w < 0 for w, _ in comps):
            raise ValidationError("mixture weights must be non-negative")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > tol.norm:
            raise ValidationError(f"mixture weights sum to {total!r}")
        self.components = comps
        self.dim = comps[0][1].dim

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for w, _ in self.components)

    @property
    def density_matrix(self) -> np.ndarray:
        return sum(w * np.outer(s.amplitudes, s.amplitudes.conj()) for w, s in self.components)

    def __repr__(self) -> str:
        return f"MixedState(dim={self.dim}, n={len(self.components)})"


# --- operations ---------------------------------------------------------------


def luders_collapse(
    state: StateVector, event: EventProjector, tol: Tolerances | None = None
) -> tuple[float, StateVector | None]:
    """Selective ideal occurrence of ``event``.

    Returns the Born probability and the collapsed state ``E psi / |E psi|``,
    or ``None`` in place of the state when the probability is negligible.
    """
    tol = resolve(tol)
    _check_dims(state.dim, event.dim)
    projected = event.matrix @ state.amplitudes
    prob = float(np.vdot(state.amplitudes, projected).real)
    if prob <= tol.p_min:
        return prob, None
    return prob, StateVector.normalized(projected)


def coherent_decompose(
    state: StateVector, event: EventProjector, tol: Tolerances | None = None
) -> tuple[tuple[float, StateVector | None], tuple[float, StateVector | None]]:
    """Split ``psi`` into its ``E`` and ``I - E`` components: ``psi = w1 phi1 + w2 phi2``."""
    tol = resolve(tol)
    _check_dims(state.dim, event.dim)
    inside = event.matrix @ state.amplitudes
    outside = state.amplitudes - inside
    parts = []
    for v in (inside, outside):
        w = float(np.linalg.norm(v))
        parts.append((w, StateVector.normalized(v) if w > tol.amp_min else None))
    return parts[0], parts[1]


def spectral_decompose(h: np.ndarray, tol: Tolerances | None = None) -> DiscreteObservable:
    """Hermitian matrix to spectral form, merging eigenvalues closer than ``tol.spec``.

    Eigenvalues are sorted and a new cluster starts whenever the gap to the
    previous eigenvalue exceeds ``tol.spec``, so chains of close values merge
    transitively.  Each cluster is represented by its mean.
    """
    tol = resolve(tol)
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    herm = frob(h - h.conj().T)
    if herm > tol.op:
        raise ValidationError(f"matrix not Hermitian: |H - H^dag|_F = {herm:.3e}")
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > tol.spec:
            clusters.append([i])
        else:
            clusters[-1].append(i)
    branches = []
    for idx in clusters:
        cols = v[:, idx]
        branches.append((float(np.mean(w[idx])), EventProjector(cols @ cols.conj().T, tol=tol)))
    return DiscreteObservable(branches, tol=tol)


Kronable = Union[StateVector, EventProjector, UnitaryEvolution, np.ndarray]


def tensor(a: Kronable, b: Kronable) -> Kronable:
    """Kronecker product of two objects of the same kind, keeping the kind."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, EventProjector) and isinstance(b, EventProjector):
        return EventProjector(np.kron(a.matrix, b.matrix))
    if isinstance(a, UnitaryEvolution) and isinstance(b, UnitaryEvolution):
        return UnitaryEvolution(np.kron(a.matrix, b.matrix))
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray) and a.ndim == b.ndim and a.ndim in (1, 2):
        return np.kron(a, b)
    raise ValidationError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def density_matrix(state: StateVector) -> np.ndarray:
    return np.outer(state.amplitudes, state.amplitudes.conj())


def _validate_density(rho: np.ndarray, tol: Tolerances) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    if frob(rho - rho.conj().T) > tol.op:
        raise ValidationError("density matrix not Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol.norm:
        raise ValidationError(f"density matrix trace is {tr!r}")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -tol.op:
        raise ValidationError("density matrix not positive semidefinite")


def partial_trace(
    rho: np.ndarray | StateVector,
    dims: tuple[int, int],
    keep: Literal["A", "B"] = "A",
    tol: Tolerances | None = None,
) -> np.ndarray:
    """Reduced density matrix of one factor of a bipartite ``dim_A * dim_B`` system."""
    tol = resolve(tol)
    if isinstance(rho, StateVector):
        rho = density_matrix(rho)
    rho = np.asarray(rho, dtype=np.complex128)
    da, db = dims
    if rho.shape != (da * db, da * db):
        raise DimensionError(f"density matrix shape {rho.shape} does not match dims {dims}")
    _validate_density(rho, tol)
    r = rho.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("ijil->jl", r)
    raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")


def schmidt_decompose(
    state: StateVector, dims: tuple[int, int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Canonical bi-orthogonal expansion ``psi = sum_i c_i |a_i>|b_i>``.

    Returns ``(coefficients, a_vectors, b_vectors)`` with vectors as columns and
    coefficients non-negative, descending.
    """
    da, db = dims
    if state.dim != da * db:
        raise DimensionError(f"state dim {state.dim} does not match dims {dims}")
    u, s, vh = np.linalg.svd(state.amplitudes.reshape(da, db))
    return s, u[:, : len(s)], vh[: len(s)].T


def states_equal(
    u: StateVector | np.ndarray,
    v: StateVector | np.ndarray,
    tol: Tolerances | None = None,
    *,
    up_to_phase: bool = False,
) -> bool:
    """Literal vector equality within ``tol.op``; optionally modulo a global phase."""
    tol = resolve(tol)
    a, b = _as_vector(u), _as_vector(v)
    _check_dims(a.shape[0], b.shape[0])
    if up_to_phase:
        overlap = np.vdot(b, a)
        if abs(overlap) > 0:
            b = b * (overlap / abs(overlap))
    return float(np.linalg.norm(a - b)) <= tol.op
