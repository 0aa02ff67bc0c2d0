"""Nonnegative sesquilinear forms on C^n and the order isomorphism ``Phi_t``.

A form is stored as its Gram matrix ``G`` with ``t(x, y) = <Gx, y>``.  The
Gram matrix may be singular; ``ker t`` is then nontrivial and the quotient
``C^n / ker t`` with ``<x + ker t, y + ker t>_t = t(x, y)`` is realized in
coordinates by ``x -> C_t x``, where ``C_t = diag(sqrt(lambda)) V_r^*``.  In
finite dimension this quotient is already complete, so it is ``H_t``.

For ``w <= t`` the map ``x + ker t -> x + ker w`` is the contraction
``j = C_w C_t^+`` and ``Phi_t(w) = j^* j``.  ``Phi_t`` is an order isomorphism
of ``[0, t]`` onto ``[0, I]`` that respects convex combinations, parallel
sums and shorts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CrossCheckFailure, NotDominated, NotInInterval
from .matfile import doc_to_form_parts, form_to_doc
from .parallel_ops import parallel_sum
from .psd_core import (
    PsdMatrix,
    Subspace,
    _hermitize,
    as_psd,
    check_same_dim,
    loewner_leq,
    spectral_norm,
)
from .quasi_unit import InfimumResult, ando_infimum, is_quasi_unit
from .short_lebesgue import generalized_short
from .tolerances import Tolerances, resolve

__all__ = [
    "Form",
    "QuotientSpace",
    "FormInfimum",
    "FormQuasiUnitReport",
    "form_kernel",
    "quotient_space",
    "embedding_j",
    "phi",
    "phi_inverse",
    "form_parallel_sum",
    "form_short",
    "form_inf_exists",
    "form_quasi_unit",
    "form_leq",
]


@dataclass(frozen=True)
class Form:
    """A nonnegative sesquilinear form ``t(x, y) = <G x, y>`` on ``C^n``."""

    gram: PsdMatrix
    label: str | None = None

    def __init__(self, gram, label: str | None = None, tol: Tolerances | None = None):
        object.__setattr__(self, "gram", as_psd(gram, tol))
        object.__setattr__(self, "label", label)

    @property
    def space_dim(self) -> int:
        return self.gram.dim

    def __call__(self, x, y) -> complex:
        return complex(np.vdot(np.asarray(y), self.gram.matrix @ np.asarray(x)))

    def quad(self, x) -> float:
        """``t[x] = t(x, x)``."""
        return self.gram.quad(x)

    def __add__(self, other: "Form") -> "Form":
        return Form(self.gram + other.gram)

    def __sub__(self, other: "Form") -> "Form":
        return Form(self.gram - other.gram)

    def __mul__(self, c) -> "Form":
        return Form(self.gram.scaled(c))

    __rmul__ = __mul__

    def to_doc(self) -> dict:
        return form_to_doc(self.gram.matrix, self.label)

    @classmethod
    def from_doc(cls, doc: dict, tol: Tolerances | None = None) -> "Form":
        gram, label = doc_to_form_parts(doc)
        return cls(gram, label, tol)


def _as_form(x, tol=None) -> Form:
    return x if isinstance(x, Form) else Form(x, tol=tol)


def form_leq(u, v, tol: Tolerances | None = None) -> bool:
    """``u <= v``, i.e. ``u[x] <= v[x]`` for all ``x`` (Gram order)."""
    return loewner_leq(_as_form(u).gram, _as_form(v).gram, tol)


def form_kernel(t, tol: Tolerances | None = None) -> Subspace:
    """``ker t = {x : t[x] = 0}``."""
    return _as_form(t, tol).gram.kernel()


@dataclass(frozen=True)
class QuotientSpace:
    """``C^n / ker t`` in coordinates where its inner product is the standard one.

    ``basis`` is an orthonormal basis ``V`` of ``ran G`` and
    ``coord_map = V^* G^{1/2}``, so ``coord_map^* coord_map = G``.
    """

    parent: Form
    rank: int
    coord_map: np.ndarray  # rank x n
    basis: np.ndarray  # n x rank

    def coords(self, x) -> np.ndarray:
        return self.coord_map @ np.asarray(x)

    def right_inverse(self) -> np.ndarray:
        """``C_t^+`` (n x rank): ``C_t C_t^+ = I``."""
        g = self.parent.gram
        v = g.range_basis
        root_inv = (v / np.sqrt(g.significant_eigenvalues)) @ v.conj().T
        return root_inv @ self.basis


def _canonical_range_basis(g: PsdMatrix, tol: Tolerances) -> np.ndarray:
    # eigenvalue clusters in descending order; inside a cluster, Gram-Schmidt
    # on the projected standard basis, so the result does not depend on how
    # eigh happens to rotate a degenerate eigenspace
    lam = g.significant_eigenvalues[::-1]
    vecs = g.range_basis[:, ::-1]
    gap = tol.tol_conv * max(1.0, g.norm)
    cols = []
    start = 0
    while start < len(lam):
        stop = start + 1
        while stop < len(lam) and lam[stop - 1] - lam[stop] <= gap:
            stop += 1
        block = vecs[:, start:stop]
        proj = block @ block.conj().T
        picked: list[np.ndarray] = []
        resid = proj.copy()
        while len(picked) < stop - start:
            norms = np.linalg.norm(resid, axis=0)
            i = int(np.flatnonzero(norms >= 0.5 * norms.max())[0])
            q = resid[:, i] / norms[i]
            picked.append(q)
            resid = resid - np.outer(q, q.conj() @ resid)
        cols.extend(picked)
        start = stop
    if not cols:
        return np.zeros((g.dim, 0), dtype=g.eigenvectors.dtype)
    return np.column_stack(cols)


def quotient_space(t, tol: Tolerances | None = None) -> QuotientSpace:
    tol = resolve(tol)
    t = _as_form(t, tol)
    g = t.gram
    basis = _canonical_range_basis(g, tol)
    v = g.range_basis
    root = (v * np.sqrt(g.significant_eigenvalues)) @ v.conj().T
    return QuotientSpace(parent=t, rank=g.rank, coord_map=basis.conj().T @ root, basis=basis)


def embedding_j(t, w, tol: Tolerances | None = None) -> np.ndarray:
    """The contraction ``x + ker t -> x + ker w`` from ``H_t`` to ``H_w``.

    Requires ``w <= t``; raises :class:`NotDominated` otherwise.
    """
    tol = resolve(tol)
    t, w = _as_form(t, tol), _as_form(w, tol)
    check_same_dim(t.gram, w.gram)
    if not form_leq(w, t, tol):
        raise NotDominated("embedding j_{t,w} needs w <= t")
    qt, qw = quotient_space(t, tol), quotient_space(w, tol)
    j = qw.coord_map @ qt.right_inverse()
    if j.size and spectral_norm(j) > 1.0 + tol.tol_conv:
        raise CrossCheckFailure("j_{t,w} is not a contraction", spectral_norm(j) - 1.0)
    return j


def phi(t, w, tol: Tolerances | None = None) -> PsdMatrix:
    """``Phi_t(w) = j^* j``, a positive contraction on ``H_t`` (rank t x rank t)."""
    tol = resolve(tol)
    t, w = _as_form(t, tol), _as_form(w, tol)
    check_same_dim(t.gram, w.gram)
    if not form_leq(w, t, tol):
        raise NotInInterval("Phi_t is defined on [0, t]; w <= t fails")
    qt = quotient_space(t, tol)
    if qt.rank == 0:
        return PsdMatrix.zeros(0, tol)
    ri = qt.right_inverse()
    return PsdMatrix(_hermitize(ri.conj().T @ w.gram.matrix @ ri), tol, hermitize=True)


def phi_inverse(t, a, tol: Tolerances | None = None) -> Form:
    """The form ``w(x, y) = <A (x + ker t), y + ker t>_t``; needs ``0 <= A <= I``."""
    tol = resolve(tol)
    t = _as_form(t, tol)
    qt = quotient_space(t, tol)
    a_m = a.matrix if isinstance(a, PsdMatrix) else np.asarray(a)
    if a_m.size == 0 or qt.rank == 0:
        if qt.rank != 0 or a_m.size not in (0, 1) or (a_m.size == 1 and abs(a_m.reshape(-1)[0]) > 0):
            raise NotInInterval(f"A must be {qt.rank}x{qt.rank}")
        return Form(PsdMatrix.zeros(t.space_dim, tol))
    if a_m.shape != (qt.rank, qt.rank):
        raise NotInInterval(f"A must be {qt.rank}x{qt.rank} (rank of t), got {a_m.shape}")
    a = as_psd(a_m, tol)
    if not loewner_leq(a, PsdMatrix.identity(qt.rank, tol), tol):
        raise NotInInterval("A is not a contraction")
    c = qt.coord_map
    return Form(PsdMatrix(_hermitize(c.conj().T @ a.matrix @ c), tol, hermitize=True))


def form_parallel_sum(t, w, tol: Tolerances | None = None, *, check: bool = False) -> Form:
    """``t : w``; with ``check`` also verifies ``Phi_{t+w}(t:w) = Phi(t) : Phi(w)``."""
    tol = resolve(tol)
    t, w = _as_form(t, tol), _as_form(w, tol)
    check_same_dim(t.gram, w.gram)
    out = Form(parallel_sum(t.gram, w.gram, tol))
    if check:
        s = t + w
        lhs = phi(s, out, tol)
        if lhs.dim:
            rhs = parallel_sum(phi(s, t, tol), phi(s, w, tol), tol)
            gap = spectral_norm(lhs.matrix - rhs.matrix)
            if gap > tol.tol_conv:
                raise CrossCheckFailure("Phi does not carry t:w to Phi(t):Phi(w)", gap)
    return out


def form_short(w, t, tol: Tolerances | None = None) -> Form:
    """``D_w t = sup_n t : (n w)``, the ``w``-almost dominated part of ``t``."""
    tol = resolve(tol)
    w, t = _as_form(w, tol), _as_form(t, tol)
    check_same_dim(t.gram, w.gram)
    return Form(generalized_short(w.gram, t.gram, tol))


@dataclass(frozen=True)
class FormInfimum:
    exists: bool
    value: Form | None
    witness: str | None


def form_inf_exists(u, v, tol: Tolerances | None = None) -> FormInfimum:
    """Infimum of two forms: exists iff ``D_u v`` and ``D_v u`` are comparable."""
    tol = resolve(tol)
    u, v = _as_form(u, tol), _as_form(v, tol)
    check_same_dim(u.gram, v.gram)
    res: InfimumResult = ando_infimum(u.gram, v.gram, tol)
    return FormInfimum(res.exists, Form(res.value) if res.exists else None, res.witness)


@dataclass(frozen=True)
class FormQuasiUnitReport:
    """Form-level quasi-unit tests for ``w ∈ [0, t]``."""

    fixed_point: bool  # D_w t = w
    extreme: bool  # Phi_t(w) is a projection
    disjoint_part: bool  # w : (t - w) = 0
    gram_level: bool  # is_quasi_unit(gram w, gram t)
    gaps: dict

    @property
    def unanimous(self) -> bool:
        return len({self.fixed_point, self.extreme, self.disjoint_part, self.gram_level}) == 1

    @property
    def verdict(self) -> bool:
        return self.fixed_point and self.extreme and self.disjoint_part and self.gram_level


def form_quasi_unit(w, t, tol: Tolerances | None = None) -> FormQuasiUnitReport:
    tol = resolve(tol)
    w, t = _as_form(w, tol), _as_form(t, tol)
    scale = 1.0 + t.gram.norm
    p = phi(t, w, tol)
    fixed_gap = spectral_norm(form_short(w, t, tol).gram.matrix - w.gram.matrix)
    defect = spectral_norm(p.matrix - p.matrix @ p.matrix) if p.dim else 0.0
    disjoint_gap = parallel_sum(w.gram, t.gram - w.gram, tol).norm
    cert = is_quasi_unit(w.gram, t.gram, tol)
    return FormQuasiUnitReport(
        fixed_point=fixed_gap <= tol.tol_conv * scale,
        extreme=defect <= tol.tol_conv,
        disjoint_part=disjoint_gap <= tol.tol_conv * (1.0 + w.gram.norm + t.gram.norm),
        gram_level=cert.verdict,
        gaps={"fixed_point": fixed_gap, "projection_defect": defect, "disjoint": disjoint_gap},
    )
