"""Parallel addition and parallel subtraction of PSD matrices.

``A : B`` is the PSD matrix whose quadratic form at ``x`` is
``inf_y <A(x-y), x-y> + <By, y>``.  In finite dimension it has the closed
form ``A (A+B)^+ B``.

Forming ``(A+B)^+`` explicitly is a poor idea when the operands live on very
different scales: the generalized short needs ``B : (n A)`` with ``n`` around
``2**40``.  A relative eigenvalue cutoff on ``B + nA`` then discards the
``O(1)`` part of the spectrum and the result is garbage.  We evaluate the
same closed form through the factorization ``A + B = W^* W``, with
``W = [J_A^*; J_B^*]`` built from the factors ``J_A J_A^* = A`` and
``J_B J_B^* = B``.  That gives

    A (A+B)^+ B = J_A  E_A (W W^+) E_B^*  J_B^*,

where ``W W^+`` is the projection onto ``ran W``.  That projection comes from
an SVD of ``W``, whose condition number is only the square root of that of
``A + B``.  The rank of ``W`` is
``dim(ran A + ran B)``, decided from the separate rank decisions of ``A`` and
``B``, so the result does not depend on their relative scale.

Parallel difference is only defined for forms in the source theory
(``(s ÷ t)[x] = sup_y s[x+y] - t[y]``); the matrix version here is the same
supremum evaluated on Gram matrices, transported along the form/operator
order isomorphism.
"""
from __future__ import annotations

import numpy as np

from .errors import CrossCheckFailure, DimensionMismatch, NotSolvable
from .psd_core import (
    PsdMatrix,
    _hermitize,
    as_psd,
    check_same_dim,
    pseudo_inverse,
    spectral_norm,
    subspace_intersection,
)
from .tolerances import Tolerances, resolve

__all__ = [
    "parallel_sum",
    "parallel_sum_direct",
    "variational_parallel_sum_value",
    "parallel_diff",
    "scalar_parallel_check",
]


def parallel_sum(a, b, tol: Tolerances | None = None) -> PsdMatrix:
    """``A : B``, the parallel sum.

    >>> import numpy as np
    >>> parallel_sum(np.eye(2), np.eye(2)).matrix
    array([[0.5, 0. ],
           [0. , 0.5]])
    """
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    n = check_same_dim(a, b)
    ra, rb = a.rank, b.rank
    if ra == 0 or rb == 0:
        return PsdMatrix.zeros(n, tol)
    ja, jb = a.factor(), b.factor()
    w = np.vstack([ja.conj().T, jb.conj().T])
    shared = subspace_intersection(a.range(), b.range(), tol).dim
    r = ra + rb - shared
    u, _, _ = np.linalg.svd(w, full_matrices=False)
    u = u[:, :r]
    middle = u[:ra] @ u[ra:].conj().T
    c = ja @ middle @ jb.conj().T
    return PsdMatrix(_hermitize(c), tol, hermitize=True)


def parallel_sum_direct(a, b, tol: Tolerances | None = None) -> PsdMatrix:
    """``A (A+B)^+ B`` with an explicit pseudo-inverse.

    Fine when ``A`` and ``B`` are of comparable size; kept as a cross-check for
    :func:`parallel_sum`.
    """
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    s = pseudo_inverse(PsdMatrix(a.matrix + b.matrix, tol, hermitize=True))
    c = a.matrix @ s.matrix @ b.matrix
    return PsdMatrix(_hermitize(c), tol, hermitize=True)


def variational_parallel_sum_value(a, b, x, tol: Tolerances | None = None) -> float:
    """``inf_y <A(x-y), x-y> + <By, y>`` by conjugate-gradient descent.

    This deliberately avoids pseudo-inverses: it minimizes the convex
    quadratic starting from ``y = 0`` and stops when the relative objective
    change drops below ``tol_conv / 10`` (or the gradient vanishes), with an
    iteration cap of ``10 n^2``.  CG is restarted every ``n`` steps.
    """
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    n = check_same_dim(a, b)
    x = np.asarray(x, dtype=np.result_type(a.matrix, b.matrix, np.asarray(x), float)).reshape(-1)
    if x.shape[0] != n:
        raise DimensionMismatch(f"vector has length {x.shape[0]}, matrices are {n}x{n}")
    am, bm = a.matrix, b.matrix
    m = am + bm
    rhs = am @ x

    def objective(y):
        d = x - y
        return float(np.real(np.vdot(d, am @ d) + np.vdot(y, bm @ y)))

    y = np.zeros_like(x)
    f_prev = objective(y)
    scale = np.linalg.norm(m, 2) * np.linalg.norm(x) + np.linalg.norm(rhs)
    cap = 10 * n * n
    small_steps = 0
    r = rhs.copy()
    p = r.copy()
    rr = float(np.real(np.vdot(r, r)))
    for it in range(1, cap + 1):
        if np.sqrt(rr) <= 1e-15 * max(scale, 1e-300):
            break
        mp = m @ p
        curv = float(np.real(np.vdot(p, mp)))
        if curv <= 0:
            break
        alpha = rr / curv
        y = y + alpha * p
        f_new = objective(y)
        change = abs(f_prev - f_new)
        f_prev = f_new
        if change <= (tol.tol_conv / 10) * (1.0 + abs(f_new)):
            small_steps += 1
            if small_steps >= 2:
                break
        else:
            small_steps = 0
        if it % n == 0:
            r = rhs - m @ y
            p = r.copy()
            rr = float(np.real(np.vdot(r, r)))
            continue
        r = r - alpha * mp
        rr_new = float(np.real(np.vdot(r, r)))
        p = r + (rr_new / rr) * p
        rr = rr_new
    return max(objective(y), 0.0)


def parallel_diff(s, t, tol: Tolerances | None = None, *, verify: bool = True) -> PsdMatrix:
    """Minimal solution ``X`` of ``X : T = S``, i.e. ``S ÷ T``.

    The supremum ``sup_y S[x+y] - T[y]`` is a concave quadratic in ``y`` only
    when ``T - S`` is PSD, and is finite for every ``x`` only when
    ``ran S ⊆ ran(T - S)``; then it equals ``<(S + S (T-S)^+ S) x, x>``.
    Both conditions are derived here, not quoted; when either fails
    :class:`NotSolvable` is raised with a direction of divergence.
    """
    tol = resolve(tol)
    s, t = as_psd(s, tol), as_psd(t, tol)
    n = check_same_dim(s, t)
    d_raw = _hermitize(t.matrix - s.matrix)
    w, v = np.linalg.eigh(d_raw)
    lam_max = max(float(w[-1]), 0.0)
    if w[0] < -tol.tol_psd * (1.0 + lam_max):
        direction = v[:, 0]
        raise NotSolvable(
            "definiteness",
            direction=direction,
            point=np.zeros(n, dtype=direction.dtype),
            detail=f"T - S has eigenvalue {w[0]:.3e}; S[x+sy]-T[sy] grows like s^2 along y",
        )
    # D = T - S is a difference, so its small eigenvalues are meaningful down
    # to the roundoff floor of the subtraction, far below the global rank cutoff;
    # cutting at tol_rank would misreport ran S ⊆ ran D whenever S nearly fills T
    floor = 64 * n * np.finfo(float).eps * (1.0 + s.norm + t.norm)
    keep = w > floor
    kern = v[:, ~keep]
    leak = kern.conj().T @ s.matrix
    leak_norm = spectral_norm(leak) if leak.size else 0.0
    if leak_norm > tol.tol_conv * (1.0 + s.norm + t.norm):
        # pick x maximizing the leak; y along the kernel component of Sx
        _, _, vh = np.linalg.svd(leak)
        point = vh[0].conj()
        direction = kern @ (kern.conj().T @ (s.matrix @ point))
        raise NotSolvable(
            "range",
            direction=direction,
            point=point,
            detail=f"S leaks {leak_norm:.3e} outside ran(T - S); sup grows linearly along y",
        )
    vr = v[:, keep]
    sv = s.matrix @ vr
    r = s.matrix + (sv / w[keep]) @ sv.conj().T
    result = PsdMatrix(_hermitize(r), tol, hermitize=True)
    if verify:
        back = parallel_sum(result, t, tol)
        gap = spectral_norm(back.matrix - s.matrix)
        if gap > tol.tol_conv * (1.0 + s.norm + t.norm):
            raise CrossCheckFailure("parallel_diff postcondition (S ÷ T) : T = S", gap)
    return result


def scalar_parallel_check(t, lam: float, mu: float, tol: Tolerances | None = None, *, atol: float | None = None) -> bool:
    """Check ``(lam T) : (mu T) == lam mu / (lam + mu) T``.

    ``atol`` overrides the relative threshold ``tol_conv``; the comparison is
    made against ``atol * (1 + ||T||)``.
    """
    if lam <= 0 or mu <= 0:
        raise ValueError("lam and mu must be positive")
    tol = resolve(tol)
    t = as_psd(t, tol)
    got = parallel_sum(t.scaled(lam), t.scaled(mu), tol)
    want = t.matrix * (lam * mu / (lam + mu))
    bound = (tol.tol_conv if atol is None else atol) * (1.0 + t.norm)
    return spectral_norm(got.matrix - want) <= bound
