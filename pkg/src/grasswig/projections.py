"""Orthogonal projections: construction, rank/orthogonality/commutation
predicates, and the joint splitting of a commuting pair.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InternalInconsistency,
    NotAProjection,
    NotCommuting,
)
from .linalg import (
    COMPLEX,
    as_complex,
    frobenius,
    hermitian_defect,
    hermitian_eig,
    random_subspace,
    haar_unitary_from_rng,
)
from .tolerances import DEFAULT_TOL, ToleranceConfig


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


def projection_rank(m, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Rank of a projection matrix, read off its trace.

    Validates the projection invariants (self-adjoint, idempotent, trace
    within ``rank_tol`` of an integer) and raises ``NotAProjection`` when
    any of them fails.
    """
    a = as_complex(m)
    if a.shape[0] != a.shape[1]:
        raise NotAProjection(f"matrix is {a.shape[0]}x{a.shape[1]}, not square")
    defect = hermitian_defect(a)
    if defect > tol.eq_tol:
        raise NotAProjection(f"Hermitian defect {defect:.3e} exceeds {tol.eq_tol:.1e}")
    idem = frobenius(a @ a - a)
    if idem > tol.eq_tol:
        raise NotAProjection(f"idempotency defect {idem:.3e} exceeds {tol.eq_tol:.1e}")
    trace = a.trace()
    rank = round(float(trace.real))
    if abs(trace - rank) > tol.rank_tol:
        raise NotAProjection(f"trace {trace!r} is not within {tol.rank_tol:.1e} of an integer")
    if rank < 0 or rank > a.shape[0]:
        raise NotAProjection(f"trace rounds to {rank}, outside [0, {a.shape[0]}]")
    return rank


@dataclass(frozen=True, eq=False)
class Subspace:
    """An n-dimensional subspace, stored as a d-by-n orthonormal basis."""

    basis: np.ndarray
    tol: InitVar[ToleranceConfig | None] = None

    def __post_init__(self, tol: ToleranceConfig | None) -> None:
        t = tol or DEFAULT_TOL
        b = as_complex(self.basis)
        d, n = b.shape
        if not 1 <= n <= d:
            raise NotAProjection(f"basis shape {b.shape} does not define a subspace")
        gram_defect = frobenius(b.conj().T @ b - np.eye(n))
        if gram_defect > t.eq_tol:
            raise NotAProjection(f"basis columns not orthonormal (defect {gram_defect:.3e})")
        object.__setattr__(self, "basis", _readonly(b))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class Projection:
    """A self-adjoint idempotent matrix with its rank validated and stored.

    The constructor is the single validation point; rank is never
    recomputed afterwards.
    """

    matrix: np.ndarray
    rank: int | None = None
    tol: InitVar[ToleranceConfig | None] = None

    def __post_init__(self, tol: ToleranceConfig | None) -> None:
        t = tol or DEFAULT_TOL
        m = as_complex(self.matrix)
        rank = projection_rank(m, t)
        if self.rank is not None and self.rank != rank:
            raise NotAProjection(f"declared rank {self.rank}, trace gives {rank}")
        object.__setattr__(self, "matrix", _readonly(m))
        object.__setattr__(self, "rank", rank)

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    def complement(self, tol: ToleranceConfig = DEFAULT_TOL) -> "Projection":
        eye = np.eye(self.ambient_dim, dtype=np.complex128)
        return Projection(eye - self.matrix, tol=tol)


def projection_distance(p: Projection, q: Projection) -> float:
    """Frobenius distance; the package's notion of projection equality."""
    return frobenius(p.matrix - q.matrix)


def projector_from_subspace(s: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Projection:
    """Orthogonal projection onto the span of the basis: ``B @ B*``."""
    return Projection(s.basis @ s.basis.conj().T, rank=s.rank, tol=tol)


def subspace_from_projector(p: Projection, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the range, from the eigenvalue-1 eigenvectors."""
    w, v = hermitian_eig(p.matrix, tol)
    strays = np.minimum(np.abs(w), np.abs(w - 1.0))
    if strays.max(initial=0.0) > tol.rank_tol:
        raise NotAProjection(f"eigenvalues stray from {{0,1}} by {strays.max():.3e}")
    if p.rank == 0:
        raise NotAProjection("rank-0 projection has no spanning subspace")
    return Subspace(v[:, -p.rank :], tol=tol)


def random_projection(d: int, n: int, seed: int, field: str = COMPLEX, tol: ToleranceConfig = DEFAULT_TOL) -> Projection:
    """Projection onto a seeded Haar-random n-dimensional subspace."""
    b = random_subspace(d, n, seed, field)
    return Projection(b @ b.conj().T, rank=n, tol=tol)


def sample_projection(rng: np.random.Generator, d: int, n: int, field: str = COMPLEX, tol: ToleranceConfig = DEFAULT_TOL) -> Projection:
    """Like ``random_projection`` but drawing from a live generator."""
    b = haar_unitary_from_rng(rng, d, field)[:, :n]
    return Projection(b @ b.conj().T, rank=n, tol=tol)


def _check_same_dim(p: Projection, q: Projection) -> None:
    if p.ambient_dim != q.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions differ: {p.ambient_dim} vs {q.ambient_dim}")


def trace_product(p: Projection, q: Projection, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Real part of ``tr(PQ)``; lies in ``[0, min(rank P, rank Q)]``."""
    _check_same_dim(p, q)
    value = complex(np.einsum("ij,ji->", p.matrix, q.matrix))
    bound = min(p.rank, q.rank)
    if abs(value.imag) > tol.spec_tol or not -tol.spec_tol <= value.real <= bound + tol.spec_tol:
        raise InternalInconsistency(
            f"tr(PQ) = {value!r} outside [0, {bound}] for validated projections"
        )
    return value.real


def are_orthogonal(p: Projection, q: Projection, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Range orthogonality via the trace criterion ``tr(PQ) = 0``.

    A positive answer is cross-checked against the operator criterion
    ``PQ = 0``; the two are equivalent for projections, so a disagreement
    is reported as an internal inconsistency rather than guessed away.
    """
    t = trace_product(p, q, tol)
    if t > tol.spec_tol:
        return False
    opnorm = frobenius(p.matrix @ q.matrix)
    if opnorm > np.sqrt(tol.spec_tol) * p.ambient_dim:
        raise InternalInconsistency(
            f"tr(PQ) = {t:.3e} says orthogonal but ||PQ|| = {opnorm:.3e} does not"
        )
    return True


@dataclass(frozen=True, eq=False)
class CommutingDecomposition:
    """Splitting of a commuting pair: ``P = intersection + p_remainder``,
    ``Q = intersection + q_remainder``, all three pairwise orthogonal.
    """

    intersection: Projection
    p_remainder: Projection
    q_remainder: Projection
    tol: InitVar[ToleranceConfig | None] = None

    def __post_init__(self, tol: ToleranceConfig | None) -> None:
        t = tol or DEFAULT_TOL
        parts = (self.intersection, self.p_remainder, self.q_remainder)
        for i in range(3):
            for j in range(i + 1, 3):
                overlap = trace_product(parts[i], parts[j], t)
                if overlap > t.spec_tol:
                    raise InternalInconsistency(
                        f"decomposition parts {i} and {j} overlap: tr = {overlap:.3e}"
                    )


def decompose_commuting(p: Projection, q: Projection, tol: ToleranceConfig = DEFAULT_TOL) -> CommutingDecomposition:
    """Split a commuting pair P, Q into intersection plus disjoint remainders.

    ``QPQ`` is a projection exactly when P and Q commute; both tests are
    run and must agree, surfacing borderline numerics as
    ``InternalInconsistency`` instead of silently picking a side.
    """
    _check_same_dim(p, q)
    r = q.matrix @ p.matrix @ q.matrix
    try:
        intersection = Projection(r, tol=tol)
        idempotent_ok = True
    except NotAProjection:
        idempotent_ok = False
    commutator = frobenius(p.matrix @ q.matrix - q.matrix @ p.matrix)
    commute_ok = commutator <= tol.eq_tol
    if idempotent_ok != commute_ok:
        raise InternalInconsistency(
            f"QPQ projection test ({idempotent_ok}) disagrees with commutator "
            f"norm {commutator:.3e} at tolerance {tol.eq_tol:.1e}"
        )
    if not commute_ok:
        raise NotCommuting(f"||PQ - QP|| = {commutator:.3e} exceeds {tol.eq_tol:.1e}")
    p_rem = Projection(p.matrix - intersection.matrix, tol=tol)
    q_rem = Projection(q.matrix - intersection.matrix, tol=tol)
    out = CommutingDecomposition(intersection, p_rem, q_rem, tol=tol)
    for original, remainder in ((p, p_rem), (q, q_rem)):
        defect = frobenius(original.matrix - (intersection.matrix + remainder.matrix))
        if defect > tol.eq_tol:
            raise InternalInconsistency(f"decomposition fails to reassemble: {defect:.3e}")
    return out
