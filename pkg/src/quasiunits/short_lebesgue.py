"""Generalized shorts ``[A]B`` and the Lebesgue decomposition of ``B`` w.r.t. ``A``.

``[A]B`` is the largest ``C <= B`` that is ``A``-absolutely continuous.  Three
independent routes compute it:

* :func:`short_iterative`: the monotone limit of ``B : (nA)`` along
  ``n = 2**k``;
* :func:`short_aux`: ``J_B (I - P_M) J_B^*``, with ``J_B`` the embedding of the
  auxiliary space of ``B`` and ``M`` the multivalued part of the graph
  relation ``{(Ax, Bx)}``;
* :func:`short_schur`: the Schur-complement short of ``B`` to ``ran A``.

In finite dimension absolute continuity is range inclusion and the graph
relation is already closed, so all three coincide.
:func:`generalized_short` runs them all and refuses to answer when they
disagree.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CrossCheckFailure, NoConvergence
from .parallel_ops import parallel_sum
from .psd_core import (
    PsdMatrix,
    Subspace,
    _hermitize,
    as_psd,
    check_same_dim,
    loewner_gap,
    loewner_leq,
    pseudo_inverse,
    rank_threshold,
    spectral_norm,
    subspace_intersection,
)
from .tolerances import Tolerances, resolve

__all__ = [
    "AuxSpace",
    "LebesgueDecomposition",
    "ShortTrace",
    "build_aux_space",
    "multivalued_part",
    "short_iterative",
    "short_iterative_trace",
    "short_aux",
    "short_schur",
    "generalized_short",
    "is_absolutely_continuous",
    "is_singular",
    "range_included",
    "lebesgue_decompose",
]

ITERATION_CAP = 60


@dataclass(frozen=True)
class AuxSpace:
    """Coordinates for the auxiliary Hilbert space ``H_B``.

    ``H_B`` is identified with ``C^rank`` so that ``J`` (n x rank) satisfies
    ``J @ Jstar == B`` and has full column rank.  The coordinates come from the
    (phase-normalized) eigendecomposition of ``B``, so they are reproducible.
    """

    source: PsdMatrix
    rank: int
    J: np.ndarray
    Jstar: np.ndarray

    def left_inverse(self) -> np.ndarray:
        """``J^+`` (rank x n); ``J^+ J = I``."""
        w = self.source.significant_eigenvalues
        return (self.source.range_basis / np.sqrt(w)).conj().T

    def embed(self, q) -> np.ndarray:
        """``J Q J^*`` for a rank x rank matrix ``Q``."""
        return _hermitize(self.J @ np.asarray(q) @ self.Jstar)

    def pull_back(self, a) -> np.ndarray:
        """``J^+ A (J^*)^+``: the operator on ``H_B`` that ``A`` comes from."""
        li = self.left_inverse()
        a = a.matrix if isinstance(a, PsdMatrix) else np.asarray(a)
        return _hermitize(li @ a @ li.conj().T)


def build_aux_space(b, tol: Tolerances | None = None) -> AuxSpace:
    b = as_psd(b, tol)
    j = b.factor()
    return AuxSpace(source=b, rank=b.rank, J=j, Jstar=j.conj().T)


def multivalued_part(a, b, tol: Tolerances | None = None) -> Subspace:
    """``M = {J_B^* x : Ax = 0}`` as an orthonormal basis of a subspace of ``H_B``."""
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    aux = build_aux_space(b, tol)
    if aux.rank == 0:
        return Subspace.zero(0)
    images = aux.Jstar @ a.kernel_basis
    if images.shape[1] == 0:
        return Subspace.zero(aux.rank)
    u, s, _ = np.linalg.svd(images, full_matrices=False)
    keep = s**2 > rank_threshold(b.norm, tol)
    return Subspace(aux.rank, u[:, keep])


def short_aux(a, b, tol: Tolerances | None = None) -> PsdMatrix:
    """``[A]B = J_B (I - P_M) J_B^*``."""
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    aux = build_aux_space(b, tol)
    if aux.rank == 0:
        return PsdMatrix.zeros(b.dim, tol)
    m = multivalued_part(a, b, tol)
    keep = np.eye(aux.rank) - m.projector()
    return PsdMatrix(aux.embed(keep), tol, hermitize=True)


def short_schur(a, b, tol: Tolerances | None = None) -> PsdMatrix:
    """Schur-complement short of ``B`` to ``ran A``.

    In a basis adapted to ``ran A ⊕ ker A`` with ``B = [[B11, B12], [B21, B22]]``
    the short is ``[[B11 - B12 B22^+ B21, 0], [0, 0]]``.
    """
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    n = check_same_dim(a, b)
    u1, u2 = a.range_basis, a.kernel_basis
    if u1.shape[1] == 0:
        return PsdMatrix.zeros(n, tol)
    bm = b.matrix
    b11 = u1.conj().T @ bm @ u1
    if u2.shape[1] == 0:
        return b
    b12 = u1.conj().T @ bm @ u2
    b22 = PsdMatrix(u2.conj().T @ bm @ u2, tol, hermitize=True)
    schur = b11 - b12 @ pseudo_inverse(b22).matrix @ b12.conj().T
    return PsdMatrix(_hermitize(u1 @ schur @ u1.conj().T), tol, hermitize=True)


@dataclass
class ShortTrace:
    """Iterates of ``B : (2**k A)`` and the gaps between successive ones."""

    result: PsdMatrix
    iterates: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    worst_monotonicity_violation: float = 0.0

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1


def short_iterative_trace(a, b, tol: Tolerances | None = None) -> ShortTrace:
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    stop = tol.tol_conv * (1.0 + b.norm)
    prev = parallel_sum(b, a, tol)
    trace = ShortTrace(result=prev, iterates=[prev])
    gap = float("inf")
    for k in range(1, ITERATION_CAP + 1):
        cur = parallel_sum(b, a.scaled(2.0**k), tol)
        gap = spectral_norm(cur.matrix - prev.matrix)
        trace.iterates.append(cur)
        trace.gaps.append(gap)
        trace.worst_monotonicity_violation = max(
            trace.worst_monotonicity_violation, loewner_gap(prev, cur)
        )
        if gap < stop:
            trace.result = cur
            return trace
        prev = cur
    raise NoConvergence(f"B:(2^k A) did not settle within k={ITERATION_CAP}", gap)


def short_iterative(a, b, tol: Tolerances | None = None) -> PsdMatrix:
    """``[A]B`` as the limit of ``B : (nA)``, ``n = 1, 2, 4, ...``.

    Stops when successive iterates differ by less than
    ``tol_conv * (1 + ||B||)``; raises :class:`NoConvergence` after ``k = 60``.
    """
    return short_iterative_trace(a, b, tol).result


def _maximality_spot_check(a: PsdMatrix, b: PsdMatrix, short: PsdMatrix, tol: Tolerances, samples: int) -> float:
    # C = J Q J^* with Q a contraction supported on {xi : J xi ∈ ran A} is below B
    # and has range inside ran A, so it must sit below [A]B.
    aux = build_aux_space(b, tol)
    if aux.rank == 0 or samples <= 0:
        return 0.0
    proj_a = a.range_basis @ a.range_basis.conj().T
    # N = {xi : (I - P_A) J xi = 0}
    leak = aux.J - proj_a @ aux.J
    _, s, vh = np.linalg.svd(leak, full_matrices=True)
    sig = np.zeros(aux.rank)
    sig[: len(s)] = s
    null = vh.conj().T[:, sig**2 <= rank_threshold(b.norm, tol)]
    if null.shape[1] == 0:
        return 0.0
    rng = np.random.default_rng(0)
    worst = 0.0
    k = null.shape[1]
    for _ in range(samples):
        g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        q, _ = np.linalg.qr(g)
        eig = rng.uniform(0.0, 1.0, k)
        eig[rng.integers(k)] = 1.0
        r = (q * eig) @ q.conj().T
        c = aux.embed(null @ r @ null.conj().T)
        worst = max(worst, loewner_gap(c, short.matrix))
    return worst


def generalized_short(
    a,
    b,
    tol: Tolerances | None = None,
    *,
    crosscheck: bool = True,
    maximality_samples: int = 3,
) -> PsdMatrix:
    """``[A]B``, the generalized short of ``B`` with respect to ``A``.

    Returns the auxiliary-space result.  With ``crosscheck`` (the default)
    the Schur route must agree within ``tol_conv * (1 + ||B||)`` and the
    iterative route within ten times that; a few sampled ``C <= B`` with
    ``ran C ⊆ ran A`` must lie below the result.  Any disagreement raises
    :class:`CrossCheckFailure`.

    >>> import numpy as np
    >>> generalized_short(np.diag([1.0, 0.0]), [[2.0, 1.0], [1.0, 1.0]]).matrix.round(12)
    array([[1., 0.],
           [0., 0.]])
    """
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    aux = short_aux(a, b, tol)
    if not crosscheck:
        return aux
    scale = 1.0 + b.norm
    schur = short_schur(a, b, tol)
    gap = spectral_norm(aux.matrix - schur.matrix)
    if gap > tol.tol_conv * scale:
        raise CrossCheckFailure("short_aux vs short_schur", gap)
    it = short_iterative(a, b, tol)
    for name, other in (("short_aux vs short_iterative", aux), ("short_schur vs short_iterative", schur)):
        gap = spectral_norm(other.matrix - it.matrix)
        if gap > 10 * tol.tol_conv * scale:
            raise CrossCheckFailure(name, gap)
    viol = _maximality_spot_check(a, b, aux, tol, maximality_samples)
    if viol > tol.tol_order * (1.0 + 2 * b.norm):
        raise CrossCheckFailure("maximality: sampled A-continuous C <= B not below [A]B", viol)
    return aux


def range_included(b, a, tol: Tolerances | None = None) -> bool:
    """``ran B ⊆ ran A`` using the shared principal-angle rule."""
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    return subspace_intersection(a.range(), b.range(), tol).dim == b.rank


def is_absolutely_continuous(b, a, tol: Tolerances | None = None) -> bool:
    """``B << A``: decided by ``[A]B == B`` and, independently, ``ran B ⊆ ran A``."""
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    short = generalized_short(a, b, tol)
    by_short = spectral_norm(short.matrix - b.matrix) <= tol.tol_conv * (1.0 + b.norm)
    by_range = range_included(b, a, tol)
    if by_short != by_range:
        raise CrossCheckFailure(
            "absolute continuity: short test and range-inclusion test disagree",
            spectral_norm(short.matrix - b.matrix),
            f"short says {by_short}, range says {by_range}",
        )
    return by_short


def is_singular(a, b, tol: Tolerances | None = None) -> bool:
    """``A ⊥ B``: decided by ``A : B == 0`` and, independently, ``ran A ∩ ran B == {0}``."""
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    ps_norm = parallel_sum(a, b, tol).norm
    by_sum = ps_norm <= tol.tol_conv * (1.0 + a.norm + b.norm)
    by_range = subspace_intersection(a.range(), b.range(), tol).dim == 0
    if by_sum != by_range:
        raise CrossCheckFailure(
            "singularity: parallel-sum test and range-intersection test disagree",
            ps_norm,
            f"parallel sum says {by_sum}, ranges say {by_range}",
        )
    return by_sum


@dataclass(frozen=True)
class LebesgueDecomposition:
    regular: PsdMatrix
    singular_part: PsdMatrix
    unique: bool
    alpha_min: float | None


def lebesgue_decompose(a, b, tol: Tolerances | None = None) -> LebesgueDecomposition:
    """Split ``B`` into ``[A]B`` (A-absolutely continuous) plus an A-singular rest.

    ``unique`` records whether ``[A]B <= alpha A`` for a finite ``alpha``;
    ``alpha_min`` is the smallest such ``alpha`` (largest generalized
    eigenvalue of ``([A]B, A)`` on ``ran A``).  In finite dimension the short
    always has range inside ``ran A``, so ``unique`` is always true here.
    """
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    regular = generalized_short(a, b, tol)
    singular_part = b - regular
    if not is_absolutely_continuous(regular, a, tol):
        raise CrossCheckFailure("Lebesgue decomposition: regular part is not A-absolutely continuous")
    if not is_singular(a, singular_part, tol):
        raise CrossCheckFailure("Lebesgue decomposition: singular part is not A-singular")

    unique = range_included(regular, a, tol)
    alpha = None
    if unique:
        if a.rank == 0:
            alpha = 0.0
        else:
            u = a.range_basis / np.sqrt(a.significant_eigenvalues)
            m = _hermitize(u.conj().T @ regular.matrix @ u)
            alpha = max(float(np.linalg.eigvalsh(m)[-1]), 0.0)
            if not loewner_leq(regular, a.scaled(alpha), tol):
                raise CrossCheckFailure("alpha_min does not dominate [A]B")
    return LebesgueDecomposition(regular=regular, singular_part=singular_part, unique=unique, alpha_min=alpha)
