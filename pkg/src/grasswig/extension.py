"""Real-linear extension of a rank-n projection map to Hermitian matrices.

A map defined only on rank-n projections extends uniquely, by real
linearity, to the span of those projections, which for d > n is every
Hermitian matrix.  The route goes through rank-1 projections: any dyad
``u u*`` is a fixed real combination of n+1 rank-n projections living
under a common rank-(n+1) projection, with closed-form coefficients
``1/n`` (and ``1/n - 1`` on the distinguished one).  Extending a map this
way is what lets the reconstruction pipeline read off the image of every
basis dyad even though the map itself never sees a rank-1 input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadRank, InternalInconsistency, NonHermitian, NotUnit, RankDeficient
from .linalg import COMPLEX, as_complex, frobenius, hermitian_defect, hermitian_eig
from .matio import canonical_key
from .projections import Projection, sample_projection
from .tolerances import DEFAULT_TOL, ToleranceConfig


class RankNMap:
    """Deterministic oracle sending rank-n projections to rank-n projections.

    Outputs are validated against the projection invariants and memoized by
    a canonical serialization of the input (rounded to 12 decimal digits),
    since extension re-queries the same projections many times.
    """

    def __init__(
        self,
        ambient_dim: int,
        rank: int,
        fn: Callable[[Projection], Projection],
        descriptor: str = "external",
        field: str = COMPLEX,
        tol: ToleranceConfig = DEFAULT_TOL,
    ) -> None:
        if not 1 <= rank <= ambient_dim:
            raise BadRank(f"need 1 <= rank <= dim, got rank={rank}, dim={ambient_dim}")
        self.ambient_dim = ambient_dim
        self.rank = rank
        self.field = field
        self.descriptor = descriptor
        self.tol = tol
        self._fn = fn
        self._cache: dict[bytes, Projection] = {}

    def evaluate(self, p: Projection) -> Projection:
        if p.ambient_dim != self.ambient_dim:
            raise BadRank(f"input dimension {p.ambient_dim}, map expects {self.ambient_dim}")
        if p.rank != self.rank:
            raise BadRank(f"input rank {p.rank}, map expects {self.rank}")
        key = canonical_key(p.matrix)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = self._fn(p)
        if not isinstance(out, Projection):
            out = Projection(out, tol=self.tol)
        if out.rank != self.rank or out.ambient_dim != self.ambient_dim:
            raise InternalInconsistency(
                f"map {self.descriptor!r} returned rank {out.rank} in dim {out.ambient_dim}"
            )
        self._cache[key] = out
        return out

    def __repr__(self) -> str:  # pragma: no cover
        return f"RankNMap(d={self.ambient_dim}, n={self.rank}, {self.descriptor})"


@dataclass(frozen=True, eq=False)
class CombinationCertificate:
    """Witness that ``target = sum_k coefficients[k] * projections[k]``."""

    coefficients: np.ndarray
    projections: list[Projection]
    target: Projection

    def residual(self) -> float:
        acc = np.zeros_like(self.target.matrix)
        for lam, p in zip(self.coefficients, self.projections):
            acc = acc + lam * p.matrix
        return frobenius(acc - self.target.matrix)

    def to_obj(self) -> dict:
        from .matio import matrix_to_obj

        return {
            "coefficients": [float(c) for c in self.coefficients],
            "projections": [matrix_to_obj(p.matrix) for p in self.projections],
            "target": matrix_to_obj(self.target.matrix),
        }


def combination_coefficients(n: int) -> np.ndarray:
    """Closed-form solution of ``(J - I) lam = e1`` with J the all-ones matrix:
    ``lam_k = 1/n - [k == 1]``.

    The first entry is computed as ``(1 - n)/n`` so every coefficient is the
    correctly rounded rational (``1/n - 1`` would be off by one ulp).
    """
    lam = np.full(n + 1, 1.0 / n)
    lam[0] = (1.0 - n) / n
    return lam


def complete_orthonormal(u: np.ndarray, count: int, tol: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
    """Extend a unit vector to ``count`` orthonormal vectors, deterministically.

    Candidates are the standard basis vectors in index order; any whose
    residual after orthogonalization falls below ``rank_tol`` is skipped.
    Every run over the same input picks the same completion, which keeps
    certificates reproducible.
    """
    d = u.shape[0]
    vectors = [u]
    for j in range(d):
        if len(vectors) == count:
            break
        cand = np.zeros(d, dtype=np.complex128)
        cand[j] = 1.0
        for _ in range(2):  # one re-orthogonalization pass for stability
            for v in vectors:
                cand = cand - v * np.vdot(v, cand)
        norm = float(np.linalg.norm(cand))
        if norm < tol.rank_tol:
            continue
        vectors.append(cand / norm)
    if len(vectors) < count:
        raise RankDeficient(f"could not complete to {count} orthonormal vectors in dim {d}")
    return vectors


def rank1_combination(u, rank: int, tol: ToleranceConfig = DEFAULT_TOL) -> CombinationCertificate:
    """Express the dyad ``u u*`` as a real combination of rank-n projections.

    Completes u to n+1 orthonormal vectors u_1..u_{n+1}, forms
    ``E = sum u_k u_k*`` and ``P_k = E - u_k u_k*`` (each of rank n), and
    uses the closed-form coefficients.  Requires d >= n + 1.
    """
    u = np.asarray(u, dtype=np.complex128).reshape(-1)
    d = u.shape[0]
    if d < rank + 1 or rank < 1:
        raise BadRank(f"need 1 <= rank <= d - 1 = {d - 1}, got rank={rank}")
    norm = float(np.linalg.norm(u))
    if abs(norm - 1.0) > tol.eq_tol:
        raise NotUnit(f"||u|| = {norm!r} is not 1 within {tol.eq_tol:.1e}")
    vectors = complete_orthonormal(u / norm, rank + 1, tol)
    dyads = [np.outer(v, v.conj()) for v in vectors]
    envelope = np.zeros((d, d), dtype=np.complex128)
    for dy in dyads:
        envelope += dy
    projections = [Projection(envelope - dy, rank=rank, tol=tol) for dy in dyads]
    target = Projection(dyads[0], rank=1, tol=tol)
    return CombinationCertificate(combination_coefficients(rank), projections, target)


def extend_to_rank1(phi: RankNMap, u, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Image of the dyad ``u u*`` under the real-linear extension of ``phi``.

    The result is Hermitian with trace 1 by construction (every summand has
    trace n and the coefficients sum to 1/n); a violation means the oracle
    itself is broken, not merely non-preserving.
    """
    u = np.asarray(u, dtype=np.complex128).reshape(-1)
    if u.shape[0] != phi.ambient_dim:
        raise BadRank(f"vector lives in dim {u.shape[0]}, map expects {phi.ambient_dim}")
    cert = rank1_combination(u, phi.rank, tol)
    out = np.zeros((phi.ambient_dim, phi.ambient_dim), dtype=np.complex128)
    for lam, p in zip(cert.coefficients, cert.projections):
        out = out + lam * phi.evaluate(p).matrix
    trace = complex(out.trace())
    if abs(trace - 1.0) > tol.spec_tol:
        raise InternalInconsistency(f"extension trace {trace!r} differs from 1")
    return out


def extend_to_hermitian(phi: RankNMap, a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Image of a Hermitian matrix under the real-linear extension.

    Goes through the spectral decomposition ``A = sum mu_i u_i u_i*``; which
    eigenbasis the backend picks is immaterial because the extension of a
    trace-form-preserving map is well-defined (a property the test suite
    checks rather than assumes).
    """
    a = as_complex(a)
    norm = frobenius(a)
    if hermitian_defect(a) > tol.eq_tol * max(1.0, norm):
        raise NonHermitian("input to the Hermitian extension must be Hermitian")
    w, v = hermitian_eig(a, tol)
    cutoff = 1e-14 * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    out = np.zeros_like(a)
    for mu, vec in zip(w, v.T):
        if abs(mu) <= cutoff:
            continue
        out = out + mu * extend_to_rank1(phi, vec, tol)
    trace_gap = abs(complex(out.trace()) - complex(a.trace()))
    if trace_gap > tol.spec_tol * max(1.0, norm):
        raise InternalInconsistency(f"extension changed the trace by {trace_gap:.3e}")
    return out


@dataclass(frozen=True, eq=False)
class TraceFormReport:
    """Outcome of sampling ``|tr phi(P)phi(Q) - tr PQ|`` over random pairs."""

    max_deviation: float
    witness: tuple[Projection, Projection] | None


def check_trace_form(
    phi: RankNMap,
    num_samples: int,
    seed: int,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> TraceFormReport:
    """Sample random rank-n pairs and report the worst trace-form deviation."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    witness: tuple[Projection, Projection] | None = None
    for _ in range(num_samples):
        p = sample_projection(rng, phi.ambient_dim, phi.rank, phi.field, tol)
        q = sample_projection(rng, phi.ambient_dim, phi.rank, phi.field, tol)
        before = complex(np.einsum("ij,ji->", p.matrix, q.matrix)).real
        fp, fq = phi.evaluate(p), phi.evaluate(q)
        after = complex(np.einsum("ij,ji->", fp.matrix, fq.matrix)).real
        deviation = abs(after - before)
        if deviation >= worst:
            worst = deviation
            witness = (p, q)
    return TraceFormReport(worst, witness)
