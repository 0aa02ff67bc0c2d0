"""Spectral linear algebra over Hermitian and positive semidefinite matrices.

Everything downstream shares one rank oracle: an eigenvalue counts as
nonzero when it exceeds ``tol_rank * max(1, lambda_max)``.  Ranges, kernels,
pseudo-inverses and the auxiliary-space factor are all read off the same
cached eigendecomposition, so they never disagree about what is zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput, NotPositive
from .tolerances import Tolerances, resolve

__all__ = [
    "PsdMatrix",
    "Subspace",
    "as_psd",
    "hermitian_eigen",
    "pseudo_inverse",
    "sqrt_psd",
    "loewner_leq",
    "range_projection",
    "subspace_intersection",
    "spectral_norm",
    "check_same_dim",
]


def _square(data) -> np.ndarray:
    a = np.array(data, dtype=np.result_type(np.asarray(data).dtype, np.float64), copy=True)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise DimensionMismatch("matrix dimension must be positive")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def _check_hermitian(a: np.ndarray, tol: Tolerances) -> None:
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if asym > tol.tol_sym * scale:
        raise NonHermitianInput(
            f"matrix is not Hermitian: max|M - M*| = {asym:.3e} exceeds {tol.tol_sym:g} * {scale:.3e}"
        )


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # make the largest-modulus entry of each column real and positive
    if v.size == 0:
        return v
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    phases = pivots / np.abs(pivots)
    return v * phases.conj()


def _eigh(a: np.ndarray):
    w, v = np.linalg.eigh(a)
    return w, _fix_phases(v)


def hermitian_eigen(m, tol: Tolerances | None = None):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, vectors)`` with eigenvalues ascending and
    orthonormal eigenvector columns.  The phase of each eigenvector is fixed
    (largest-modulus entry real positive), so the output is reproducible for a
    given input.

    Raises :class:`NonHermitianInput` if ``m`` is not Hermitian within
    ``tol_sym`` relative to its largest entry.
    """
    tol = resolve(tol)
    a = _square(m)
    _check_hermitian(a, tol)
    return _eigh(_hermitize(a))


def rank_threshold(lam_max: float, tol: Tolerances) -> float:
    return tol.tol_rank * max(1.0, lam_max)


class PsdMatrix:
    """An immutable positive semidefinite matrix with its eigendecomposition.

    Construction validates the input: it must be square and Hermitian, and
    eigenvalues in ``[-tol_psd * (1 + lambda_max), 0)`` are clipped to zero.
    Anything more negative raises :class:`NotPositive`.  Pass
    ``hermitize=True`` for values produced by arithmetic, where only roundoff
    separates the matrix from its adjoint.
    """

    __slots__ = ("_a", "_w", "_v", "_rank", "_tol")

    def __init__(self, data, tol: Tolerances | None = None, *, hermitize: bool = False):
        tol = resolve(tol)
        if isinstance(data, PsdMatrix):
            a = data._a.copy()
        else:
            a = _square(data)
        if not hermitize:
            _check_hermitian(a, tol)
        a = _hermitize(a)
        w, v = _eigh(a)
        lam_max = max(float(w[-1]), 0.0)
        floor = -tol.tol_psd * (1.0 + lam_max)
        if w[0] < floor:
            raise NotPositive(
                f"matrix is not positive semidefinite: smallest eigenvalue {w[0]:.3e} < {floor:.3e}"
            )
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            a = _hermitize((v * w) @ v.conj().T)
        self._set(a, w, v, tol)

    def _set(self, a, w, v, tol):
        a.setflags(write=False)
        w.setflags(write=False)
        v.setflags(write=False)
        self._a, self._w, self._v, self._tol = a, w, v, tol
        top = max(float(w[-1]), 0.0) if w.size else 0.0
        self._rank = int(np.count_nonzero(w > rank_threshold(top, tol)))

    @classmethod
    def _from_eigen(cls, w, v, tol: Tolerances, a=None) -> "PsdMatrix":
        w = np.clip(np.asarray(w, dtype=float), 0.0, None)
        order = np.argsort(w, kind="stable")
        w, v = w[order], np.asarray(v)[:, order]
        if a is None:
            a = _hermitize((v * w) @ v.conj().T)
        obj = cls.__new__(cls)
        obj._set(np.array(a), w.copy(), np.array(v), tol)
        return obj

    @classmethod
    def zeros(cls, n: int, tol: Tolerances | None = None) -> "PsdMatrix":
        return cls._from_eigen(np.zeros(n), np.eye(n), resolve(tol), a=np.zeros((n, n)))

    @classmethod
    def identity(cls, n: int, tol: Tolerances | None = None) -> "PsdMatrix":
        return cls._from_eigen(np.ones(n), np.eye(n), resolve(tol), a=np.eye(n))

    # -- accessors -----------------------------------------------------------
    @property
    def matrix(self) -> np.ndarray:
        return self._a

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._w

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._v

    @property
    def rank(self) -> int:
        return self._rank

    @property
    def tol(self) -> Tolerances:
        return self._tol

    @property
    def norm(self) -> float:
        """Spectral norm (the largest eigenvalue)."""
        return float(self._w[-1]) if self._w.size else 0.0

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self._a)

    @property
    def range_basis(self) -> np.ndarray:
        return self._v[:, self.dim - self._rank:]

    @property
    def kernel_basis(self) -> np.ndarray:
        return self._v[:, : self.dim - self._rank]

    @property
    def significant_eigenvalues(self) -> np.ndarray:
        return self._w[self.dim - self._rank:]

    def factor(self) -> np.ndarray:
        """``J`` (n x rank) with ``J @ J^* == self``, columns ordered by ascending eigenvalue."""
        return self.range_basis * np.sqrt(self.significant_eigenvalues)

    def range(self) -> "Subspace":
        return Subspace(self.dim, self.range_basis)

    def kernel(self) -> "Subspace":
        return Subspace(self.dim, self.kernel_basis)

    def quad(self, x) -> float:
        x = np.asarray(x)
        return float(np.real(np.vdot(x, self._a @ x)))

    # -- arithmetic ----------------------------------------------------------
    def scaled(self, c: float) -> "PsdMatrix":
        """``c * self`` for ``c >= 0``, reusing the cached eigenvectors."""
        c = float(c)
        if c < 0:
            raise NotPositive(f"cannot scale a PSD matrix by {c}")
        return PsdMatrix._from_eigen(self._w * c, self._v, self._tol, a=self._a * c)

    def __mul__(self, c):
        if isinstance(c, (int, float, np.floating, np.integer)):
            return self.scaled(c)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, (int, float, np.floating, np.integer)):
            return self.scaled(1.0 / c)
        return NotImplemented

    def __add__(self, other):
        other = _raw(other)
        if other is None:
            return NotImplemented
        check_same_dim(self._a, other)
        return PsdMatrix(self._a + other, self._tol, hermitize=True)

    __radd__ = __add__

    def __sub__(self, other):
        other = _raw(other)
        if other is None:
            return NotImplemented
        check_same_dim(self._a, other)
        return PsdMatrix(self._a - other, self._tol, hermitize=True)

    def __array__(self, dtype=None, copy=None):
        return np.array(self._a, dtype=dtype)

    def __repr__(self):
        body = np.array2string(self._a, precision=6, suppress_small=True)
        return f"PsdMatrix(dim={self.dim}, rank={self.rank},\n{body})"


def _raw(x):
    if isinstance(x, PsdMatrix):
        return x.matrix
    if isinstance(x, np.ndarray):
        return x
    return None


def as_psd(x, tol: Tolerances | None = None) -> PsdMatrix:
    """Coerce arrays and nested lists to :class:`PsdMatrix`; pass instances through."""
    if isinstance(x, PsdMatrix):
        return x
    return PsdMatrix(x, tol)


def check_same_dim(*mats) -> int:
    dims = {np.shape(_raw(m) if isinstance(m, PsdMatrix) else m)[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimensions differ: {sorted(dims)}")
    return dims.pop()


def spectral_norm(m) -> float:
    m = _raw(m) if isinstance(m, PsdMatrix) else np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^n given by an orthonormal basis (columns)."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis)
        if b.ndim != 2:
            b = b.reshape(self.ambient_dim, -1)
        if b.shape[0] != self.ambient_dim:
            raise DimensionMismatch(f"basis has {b.shape[0]} rows, ambient dimension is {self.ambient_dim}")
        if b.shape[1]:
            defect = np.max(np.abs(b.conj().T @ b - np.eye(b.shape[1])))
            if defect > max(resolve(None).tol_sym, 1e-13) * 100 * b.shape[1]:
                raise ValueError(f"basis columns are not orthonormal (defect {defect:.3e})")
        object.__setattr__(self, "basis", b)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((n, 0)))

    @classmethod
    def span(cls, vectors, tol: Tolerances | None = None) -> "Subspace":
        """Orthonormalize the columns of ``vectors`` (rank read from singular values)."""
        tol = resolve(tol)
        v = np.atleast_2d(np.asarray(vectors, dtype=np.result_type(np.asarray(vectors).dtype, float)))
        n = v.shape[0]
        if v.shape[1] == 0:
            return cls.zero(n)
        u, s, _ = np.linalg.svd(v, full_matrices=False)
        keep = s**2 > rank_threshold(float(s[0] ** 2), tol)
        return cls(n, _fix_phases(u[:, keep]))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self) -> "Subspace":
        n = self.ambient_dim
        if self.dim == 0:
            return Subspace(n, np.eye(n))
        if self.dim == n:
            return Subspace.zero(n)
        u, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(n, _fix_phases(u[:, self.dim:]))

    def contains(self, other: "Subspace", tol: Tolerances | None = None) -> bool:
        return subspace_intersection(self, other, tol).dim == other.dim


def pseudo_inverse(a, tol: Tolerances | None = None) -> PsdMatrix:
    """Moore-Penrose inverse of a PSD matrix over its significant spectrum."""
    a = as_psd(a, tol)
    w = a.significant_eigenvalues
    v = a.range_basis
    inv_w = np.zeros(a.dim)
    inv_w[a.dim - a.rank:] = 1.0 / w
    return PsdMatrix._from_eigen(inv_w, a.eigenvectors, a.tol, a=_hermitize((v / w) @ v.conj().T))


def sqrt_psd(a, tol: Tolerances | None = None) -> PsdMatrix:
    """The unique PSD square root.

    Eigenvalues below the rank cutoff map to exactly zero, so the root has the
    same range as ``a`` (``sqrt(1e-16) = 1e-8`` would otherwise count as rank).
    """
    a = as_psd(a, tol)
    root = np.zeros(a.dim)
    root[a.dim - a.rank:] = np.sqrt(a.significant_eigenvalues)
    v = a.eigenvectors
    return PsdMatrix._from_eigen(root, v, a.tol)


def range_projection(a, tol: Tolerances | None = None) -> PsdMatrix:
    """Orthogonal projection onto ``ran a`` (significant eigenvectors)."""
    a = as_psd(a, tol)
    w = np.zeros(a.dim)
    w[a.dim - a.rank:] = 1.0
    v = a.range_basis
    return PsdMatrix._from_eigen(w, a.eigenvectors, a.tol, a=_hermitize(v @ v.conj().T))


def loewner_leq(a, b, tol: Tolerances | None = None) -> bool:
    """``a <= b`` in the Loewner order, with slack ``tol_order * (1 + ||a|| + ||b||)``."""
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    diff = _hermitize(b.matrix - a.matrix)
    if diff.size == 0:
        return True
    lam_min = float(np.linalg.eigvalsh(diff)[0])
    return lam_min >= -tol.tol_order * (1.0 + a.norm + b.norm)


def loewner_gap(a, b) -> float:
    """How far ``a <= b`` is from holding: ``max(0, -lambda_min(b - a))``."""
    a_m = _raw(a) if isinstance(a, PsdMatrix) else np.asarray(a)
    b_m = _raw(b) if isinstance(b, PsdMatrix) else np.asarray(b)
    if b_m.size == 0:
        return 0.0
    return max(0.0, -float(np.linalg.eigvalsh(_hermitize(b_m - a_m))[0]))


def subspace_intersection(s: Subspace, t: Subspace, tol: Tolerances | None = None) -> Subspace:
    """``S ∩ T`` from principal angles: directions with cosine >= 1 - tol_rank."""
    tol = resolve(tol)
    if s.ambient_dim != t.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions differ: {s.ambient_dim} vs {t.ambient_dim}")
    n = s.ambient_dim
    if s.dim == 0 or t.dim == 0:
        return Subspace.zero(n)
    u, cos, _ = np.linalg.svd(s.basis.conj().T @ t.basis)
    hits = cos >= 1.0 - tol.tol_rank
    if not np.any(hits):
        return Subspace.zero(n)
    vecs = s.basis @ u[:, : len(cos)][:, hits]
    # re-orthonormalize to absorb the (tiny) angle between the paired directions
    q, _ = np.linalg.qr(vecs)
    return Subspace(n, _fix_phases(q))
