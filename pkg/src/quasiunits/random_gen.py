"""Seeded random instances for the property suites.

Every generator takes either an integer seed or a ``numpy.random.Generator``;
the same seed always yields bitwise-identical output.
"""
from __future__ import annotations

import numpy as np

from .errors import BadRank
from .psd_core import PsdMatrix, _hermitize, as_psd
from .quasi_unit import projection_to_quasiunit
from .short_lebesgue import build_aux_space
from .tolerances import Tolerances, resolve

__all__ = [
    "rng_from",
    "gen_random_psd",
    "gen_random_quasiunit",
    "gen_random_non_quasiunit",
    "random_projection",
    "random_contraction",
    "random_below",
]


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _gaussian(rng: np.random.Generator, shape, cplx: bool) -> np.ndarray:
    if cplx:
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return rng.standard_normal(shape)


def gen_random_psd(seed, dim: int, rank: int, tol: Tolerances | None = None, *, real: bool = False) -> PsdMatrix:
    """``G G^*`` for a Gaussian ``dim x rank`` factor ``G``."""
    if dim < 1:
        raise BadRank(f"dim must be positive, got {dim}")
    if not 0 <= rank <= dim:
        raise BadRank(f"rank must lie in 0..{dim}, got {rank}")
    rng = rng_from(seed)
    g = _gaussian(rng, (dim, rank), not real)
    return PsdMatrix(_hermitize(g @ g.conj().T), tol, hermitize=True)


def random_projection(seed, r: int, k: int | None = None, *, real: bool = False) -> np.ndarray:
    """Orthogonal projection of rank ``k`` (uniform in 0..r when omitted) on ``C^r``."""
    rng = rng_from(seed)
    if k is None:
        k = int(rng.integers(0, r + 1))
    if not 0 <= k <= r:
        raise BadRank(f"projection rank must lie in 0..{r}, got {k}")
    if r == 0 or k == 0:
        return np.zeros((r, r), dtype=np.float64 if real else np.complex128)
    q, _ = np.linalg.qr(_gaussian(rng, (r, k), not real))
    return _hermitize(q @ q.conj().T)


def random_contraction(seed, r: int, lo: float = 0.0, hi: float = 1.0, *, real: bool = False) -> np.ndarray:
    """Hermitian ``R`` on ``C^r`` with spectrum drawn uniformly from ``[lo, hi]``."""
    rng = rng_from(seed)
    if r == 0:
        return np.zeros((0, 0))
    q, _ = np.linalg.qr(_gaussian(rng, (r, r), not real))
    lam = rng.uniform(lo, hi, size=r)
    return _hermitize((q * lam) @ q.conj().T)


def random_below(seed, b, tol: Tolerances | None = None) -> PsdMatrix:
    """A random element of the interval ``[0, B]``: ``J R J^*`` with ``0 <= R <= I``."""
    tol = resolve(tol)
    b = as_psd(b, tol)
    aux = build_aux_space(b, tol)
    if aux.rank == 0:
        return PsdMatrix.zeros(b.dim, tol)
    r = random_contraction(seed, aux.rank)
    return PsdMatrix(aux.embed(r), tol, hermitize=True)


def gen_random_quasiunit(seed, b, tol: Tolerances | None = None, *, k: int | None = None) -> PsdMatrix:
    """``Psi_B(P)`` for a random projection ``P`` on ``H_B``."""
    tol = resolve(tol)
    b = as_psd(b, tol)
    p = random_projection(seed, b.rank, k)
    return projection_to_quasiunit(p, b, tol, verify=False)


def gen_random_non_quasiunit(seed, b, tol: Tolerances | None = None) -> PsdMatrix:
    """An element of ``[0, B]`` that is not a quasi-unit (needs ``rank B >= 1``).

    ``Q = (1 - eps) P + eps R`` with ``P`` a projection, ``R`` of spectrum in
    ``[0.2, 0.8]`` and ``eps`` in ``[0.1, 0.5]``.  Every eigenvalue of ``Q``
    then sits in ``[0.2 eps, 1 - 0.2 eps]``, well away from ``{0, 1}``.
    """
    tol = resolve(tol)
    b = as_psd(b, tol)
    if b.rank == 0:
        raise BadRank("the zero matrix has no non-quasi-units below it")
    rng = rng_from(seed)
    p = random_projection(rng, b.rank)
    r = random_contraction(rng, b.rank, 0.2, 0.8)
    eps = rng.uniform(0.1, 0.5)
    aux = build_aux_space(b, tol)
    return PsdMatrix(aux.embed((1 - eps) * p + eps * r), tol, hermitize=True)
