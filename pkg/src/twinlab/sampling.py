"""Seeded random instances: Haar unitaries, states, projectors, observables."""

from __future__ import annotations

from typing import Union

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .hilbert import DiscreteObservable, EventProjector, StateVector, UnitaryEvolution

SeedLike = Union[int, np.random.Generator, None]

__all__ = [
    "SeedLike",
    "rng_from",
    "haar_matrix",
    "haar_unitary",
    "random_state",
    "random_projector",
    "random_projector_in",
    "random_observable",
    "orthonormal_complement",
]


def rng_from(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_matrix(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-distributed unitary as a raw array.

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` pushed
    into ``Q`` so the result is Haar and not merely unitary.
    """
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    rng = rng_from(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitary(dim: int, seed: SeedLike = None) -> UnitaryEvolution:
    return UnitaryEvolution(haar_matrix(dim, seed))


def random_state(dim: int, seed: SeedLike = None) -> StateVector:
    """Haar-random pure state (first column of a Haar unitary)."""
    return StateVector(haar_matrix(dim, seed)[:, 0])


def random_projector_in(basis: np.ndarray, rank: int, seed: SeedLike = None) -> EventProjector:
    """Random rank-``rank`` projector supported inside the span of orthonormal ``basis`` columns."""
    basis = np.asarray(basis, dtype=np.complex128)
    dim, room = basis.shape
    if not 0 <= rank <= room:
        raise ValidationError(f"rank {rank} out of range [0, {room}]")
    if rank == 0:
        return EventProjector.zero(dim)
    cols = basis @ haar_matrix(room, seed)[:, :rank]
    return EventProjector.from_basis(cols)


def random_projector(dim: int, rank: int, seed: SeedLike = None) -> EventProjector:
    if not 0 <= rank <= dim:
        raise ValidationError(f"rank {rank} out of range [0, {dim}]")
    return random_projector_in(np.eye(dim, dtype=np.complex128), rank, seed)


def random_observable(
    dim: int, n_branches: int, seed: SeedLike = None, values: list[float] | None = None
) -> DiscreteObservable:
    """Observable whose eigenspaces split a Haar basis into ``n_branches`` non-empty groups."""
    if not 1 <= n_branches <= dim:
        raise ValidationError(f"need 1 <= n_branches <= dim, got {n_branches} for dim {dim}")
    rng = rng_from(seed)
    basis = haar_matrix(dim, rng)
    # random composition of dim into n_branches positive parts
    cuts = np.sort(rng.choice(np.arange(1, dim), size=n_branches - 1, replace=False))
    groups = np.split(np.arange(dim), cuts)
    if values is None:
        values = [float(v) for v in rng.permutation(n_branches) - (n_branches - 1) / 2]
    return DiscreteObservable(
        (val, EventProjector.from_basis(basis[:, g])) for val, g in zip(values, groups)
    )


def orthonormal_complement(vectors: np.ndarray, dim: int, rcond: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of span(``vectors`` columns)."""
    vectors = np.asarray(vectors, dtype=np.complex128).reshape(dim, -1)
    if vectors.shape[1] == 0:
        return np.eye(dim, dtype=np.complex128)
    return scipy.linalg.null_space(vectors.conj().T, rcond=rcond)
