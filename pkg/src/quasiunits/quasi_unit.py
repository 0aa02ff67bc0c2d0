"""Quasi-units of a PSD matrix ``B`` and the lattice they form.

``A ∈ [0, B]`` is a ``B``-quasi-unit when ``A = [A]B``.  Equivalently ``A`` is
``J_B P J_B^*`` for an orthogonal projection ``P`` on the auxiliary space, or
an extreme point of ``[0, B]``, or a disjoint part of ``B`` (``A`` and
``B - A`` singular), or ``A : B = A / 2``.  :func:`is_quasi_unit` measures
each of these and insists that they agree.

Extremality has no finite numerical test (one would have to rule out every
convex splitting).  It is certified through the projection characterization,
the same route the equivalence proof takes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CrossCheckFailure,
    HalfLemmaViolated,
    IdentityDrift,
    NotAProjection,
    NotInInterval,
    NotQuasiUnit,
)
from .parallel_ops import parallel_sum
from .psd_core import (
    PsdMatrix,
    _hermitize,
    as_psd,
    check_same_dim,
    loewner_leq,
    spectral_norm,
    sqrt_psd,
    subspace_intersection,
)
from .short_lebesgue import build_aux_space, generalized_short, is_singular
from .tolerances import Tolerances, resolve

__all__ = [
    "QuasiUnitCertificate",
    "InfimumResult",
    "is_quasi_unit",
    "projection_to_quasiunit",
    "quasiunit_to_projection",
    "ando_infimum",
    "sample_common_lower_bounds",
    "quasi_meet",
    "quasi_join",
    "lambda_sequence",
    "lambda_iteration_check",
]

LAMBDA_CAP = 1e15


@dataclass(frozen=True)
class QuasiUnitCertificate:
    """Evidence for (or against) ``A`` being a ``B``-quasi-unit.

    Gaps, all in spectral norm:

    * ``fixed_point_gap``: ``||A - [A]B||``
    * ``projection_defect``: ``||Q - Q^2||`` for ``Q = J^+ A (J^*)^+`` on ``H_B``
    * ``singularity_gap``: ``||A : (B - A)||``
    * ``half_lemma_gap``: ``||A : B - A/2||``
    """

    verdict: bool
    fixed_point_gap: float
    projection_defect: float
    singularity_gap: float
    half_lemma_gap: float
    thresholds: dict
    recovered_projection: np.ndarray | None = None

    @property
    def votes(self) -> dict:
        return {
            "fixed_point": self.fixed_point_gap <= self.thresholds["fixed_point"],
            "projection": self.projection_defect <= self.thresholds["projection"],
            "disjoint_part": self.singularity_gap <= self.thresholds["singularity"],
            "half_lemma": self.half_lemma_gap <= self.thresholds["half_lemma"],
        }

    def report(self) -> str:
        votes = self.votes
        lines = [f"quasi-unit: {'yes' if self.verdict else 'no'}"]
        rows = [
            ("(i)   A = [A]B", "fixed_point", self.fixed_point_gap),
            ("(ii)  A = J P J*, P projection", "projection", self.projection_defect),
            ("(iv)  A, B - A singular", "disjoint_part", self.singularity_gap),
            ("      A : B = A/2", "half_lemma", self.half_lemma_gap),
        ]
        keys = {"fixed_point": "fixed_point", "projection": "projection",
                "disjoint_part": "singularity", "half_lemma": "half_lemma"}
        for label, key, gap in rows:
            mark = "pass" if votes[key] else "fail"
            lines.append(f"  {label:<34} gap {gap:.3e}  (threshold {self.thresholds[keys[key]]:.1e})  {mark}")
        lines.append("  (iii) extreme point of [0, B]: certified via (ii)")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "fixed_point_gap": self.fixed_point_gap,
            "projection_defect": self.projection_defect,
            "singularity_gap": self.singularity_gap,
            "half_lemma_gap": self.half_lemma_gap,
            "thresholds": dict(self.thresholds),
            "votes": self.votes,
        }


def is_quasi_unit(a, b, tol: Tolerances | None = None) -> QuasiUnitCertificate:
    """Test all characterizations of ``A`` being a ``B``-quasi-unit.

    Raises :class:`NotInInterval` unless ``0 <= A <= B`` and
    :class:`CrossCheckFailure` when the characterizations split.
    """
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    if not loewner_leq(a, b, tol):
        raise NotInInterval("A is not in the interval [0, B]")
    scale = 1.0 + b.norm
    thresholds = {
        "fixed_point": tol.tol_conv * scale,
        "projection": tol.tol_conv,
        "singularity": tol.tol_conv * (1.0 + a.norm + b.norm),
        "half_lemma": tol.tol_conv * scale,
    }

    fixed_gap = spectral_norm(a.matrix - generalized_short(a, b, tol).matrix)

    aux = build_aux_space(b, tol)
    if aux.rank:
        q = aux.pull_back(a)
        defect = spectral_norm(q - q @ q)
    else:
        q = np.zeros((0, 0))
        defect = 0.0

    rest = b - a
    sing_gap = parallel_sum(a, rest, tol).norm
    singular = is_singular(a, rest, tol)

    half_gap = spectral_norm(parallel_sum(a, b, tol).matrix - a.matrix / 2)

    votes = [
        fixed_gap <= thresholds["fixed_point"],
        defect <= thresholds["projection"],
        singular,
        half_gap <= thresholds["half_lemma"],
    ]
    cert = QuasiUnitCertificate(
        verdict=all(votes),
        fixed_point_gap=fixed_gap,
        projection_defect=defect,
        singularity_gap=sing_gap,
        half_lemma_gap=half_gap,
        thresholds=thresholds,
        recovered_projection=q,
    )
    if any(votes) and not all(votes):
        raise CrossCheckFailure("quasi-unit characterizations disagree", detail=cert.report())
    return cert


def _projection_defect(p: np.ndarray) -> float:
    return max(spectral_norm(p - p.conj().T), spectral_norm(p - p @ p))


def projection_to_quasiunit(p, b, tol: Tolerances | None = None, *, verify: bool = True) -> PsdMatrix:
    """``Psi_B(P) = J_B P J_B^*`` for an orthogonal projection ``P`` on ``H_B``."""
    tol = resolve(tol)
    b = as_psd(b, tol)
    aux = build_aux_space(b, tol)
    p = np.asarray(p)
    if p.shape != (aux.rank, aux.rank):
        raise NotAProjection(f"P must be {aux.rank}x{aux.rank} (the rank of B), got {p.shape}")
    if aux.rank and _projection_defect(p) > tol.tol_conv:
        raise NotAProjection(f"P is not an orthogonal projection (defect {_projection_defect(p):.3e})")
    if aux.rank == 0:
        return PsdMatrix.zeros(b.dim, tol)
    out = PsdMatrix(aux.embed(p), tol, hermitize=True)
    if verify and not is_quasi_unit(out, b, tol).verdict:
        raise CrossCheckFailure("Psi_B(P) failed the quasi-unit test")
    return out


def quasiunit_to_projection(a, b, tol: Tolerances | None = None) -> np.ndarray:
    """Inverse of :func:`projection_to_quasiunit`."""
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    cert = is_quasi_unit(a, b, tol)
    if not cert.verdict:
        raise NotQuasiUnit("A is not a B-quasi-unit:\n" + cert.report())
    q = cert.recovered_projection
    if q.size:
        aux = build_aux_space(b, tol)
        back = spectral_norm(aux.embed(q) - a.matrix)
        if back > tol.tol_conv * (1.0 + b.norm):
            raise CrossCheckFailure("J Q J* does not reproduce A", back)
    return q


@dataclass(frozen=True)
class InfimumResult:
    exists: bool
    value: PsdMatrix | None
    witness: str | None  # "[A]B<=[B]A", "[B]A<=[A]B" or "both"
    short_ab: PsdMatrix
    short_ba: PsdMatrix


def ando_infimum(a, b, tol: Tolerances | None = None, *, samples: int = 50, seed: int = 0) -> InfimumResult:
    """Greatest lower bound of ``A`` and ``B`` in the PSD cone, if it exists.

    It exists exactly when ``[A]B`` and ``[B]A`` are comparable, and is then
    the smaller one.  The value is checked to be a common lower bound and to
    dominate ``samples`` sampled common lower bounds.
    """
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    check_same_dim(a, b)
    s_ab = generalized_short(a, b, tol)
    s_ba = generalized_short(b, a, tol)
    ab_le = loewner_leq(s_ab, s_ba, tol)
    ba_le = loewner_leq(s_ba, s_ab, tol)
    if not (ab_le or ba_le):
        return InfimumResult(False, None, None, s_ab, s_ba)
    if ab_le and ba_le:
        value, witness = s_ab, "both"
    elif ab_le:
        value, witness = s_ab, "[A]B<=[B]A"
    else:
        value, witness = s_ba, "[B]A<=[A]B"
    if not (loewner_leq(value, a, tol) and loewner_leq(value, b, tol)):
        raise CrossCheckFailure("infimum candidate is not a common lower bound")
    for c in sample_common_lower_bounds(a, b, samples, np.random.default_rng(seed), tol):
        if not loewner_leq(c, value, tol):
            raise CrossCheckFailure("a sampled common lower bound is not below the infimum")
    return InfimumResult(True, value, witness, s_ab, s_ba)


def _max_scale_below(r: np.ndarray, m: PsdMatrix) -> float:
    # largest t with t R <= M, for R supported inside ran M
    root = sqrt_psd(m)
    u = root.range_basis / root.significant_eigenvalues
    inner = _hermitize(u.conj().T @ r @ u)
    top = float(np.linalg.eigvalsh(inner)[-1]) if inner.size else 0.0
    return np.inf if top <= 0 else 1.0 / top


def sample_common_lower_bounds(a, b, count: int, rng: np.random.Generator, tol: Tolerances | None = None):
    """Yield ``count`` PSD matrices ``C`` with ``C <= A`` and ``C <= B``.

    Each is a random PSD direction ``R`` supported on ``ran A ∩ ran B``,
    scaled up to the boundary of both intervals; every other sample is rank
    one and then shrunk by a random factor.
    """
    tol = resolve(tol)
    a, b = as_psd(a, tol), as_psd(b, tol)
    n = a.dim
    common = subspace_intersection(a.range(), b.range(), tol)
    k = common.dim
    for i in range(count):
        if k == 0:
            yield np.zeros((n, n))
            continue
        width = 1 if i % 2 == 0 else int(rng.integers(1, k + 1))
        g = rng.standard_normal((k, width)) + 1j * rng.standard_normal((k, width))
        v = common.basis @ g
        r = _hermitize(v @ v.conj().T)
        t = min(_max_scale_below(r, a), _max_scale_below(r, b))
        if i % 4 == 2:
            t *= rng.uniform(0.1, 1.0)
        yield r * t


def _require_quasi_units(b, tol, **named):
    for name, m in named.items():
        cert = is_quasi_unit(m, b, tol)
        if not cert.verdict:
            raise NotQuasiUnit(f"{name} is not a B-quasi-unit:\n{cert.report()}")


def quasi_meet(s, t, b, tol: Tolerances | None = None, *, check: bool = True) -> PsdMatrix:
    """Greatest lower bound of two ``B``-quasi-units: ``2 (S : T)``.

    With ``check`` the inputs and the result are certified as quasi-units and
    the result is compared with ``[S]T`` and ``[T]S``.
    """
    tol = resolve(tol)
    s, t, b = as_psd(s, tol), as_psd(t, tol), as_psd(b, tol)
    check_same_dim(s, t, b)
    if check:
        _require_quasi_units(b, tol, S=s, T=t)
    meet = parallel_sum(s, t, tol).scaled(2.0)
    if check:
        if not is_quasi_unit(meet, b, tol).verdict:
            raise CrossCheckFailure("2(S:T) is not a quasi-unit")
        scale = tol.tol_conv * (1.0 + b.norm)
        for name, other in (("[S]T", generalized_short(s, t, tol)), ("[T]S", generalized_short(t, s, tol))):
            gap = spectral_norm(meet.matrix - other.matrix)
            if gap > scale:
                raise CrossCheckFailure(f"meet 2(S:T) differs from {name}", gap)
    return meet


def quasi_join(s, t, b, tol: Tolerances | None = None, *, check: bool = True) -> PsdMatrix:
    """Least upper bound of two ``B``-quasi-units: ``[S + T]B``."""
    tol = resolve(tol)
    s, t, b = as_psd(s, tol), as_psd(t, tol), as_psd(b, tol)
    check_same_dim(s, t, b)
    if check:
        _require_quasi_units(b, tol, S=s, T=t)
    join = generalized_short(s + t, b, tol)
    if check:
        if not is_quasi_unit(join, b, tol).verdict:
            raise CrossCheckFailure("[S+T]B is not a quasi-unit")
        if not (loewner_leq(s, join, tol) and loewner_leq(t, join, tol)):
            raise CrossCheckFailure("[S+T]B is not an upper bound of S and T")
    return join


def lambda_sequence(cap: float = LAMBDA_CAP, k_max: int | None = None) -> list:
    """``1, 3, 15, 255, ...`` (``l_{k+1} = l_k (l_k + 2)``) up to ``cap``."""
    out = []
    lam = 1
    while lam <= cap and (k_max is None or len(out) < k_max):
        out.append(lam)
        lam = lam * (lam + 2)
    return out


def lambda_iteration_check(t, w, k_max: int, tol: Tolerances | None = None) -> list:
    """Verify ``(l_k T) : W = l_k / (1 + l_k) T`` along ``l_k = 1, 3, 15, ...``.

    Requires ``T : W = T / 2`` (the quasi-unit test); returns ``(l_k, gap_k)``
    pairs.  Stops at ``k_max`` terms or once ``l_k`` exceeds ``1e15``.
    """
    tol = resolve(tol)
    t, w = as_psd(t, tol), as_psd(w, tol)
    check_same_dim(t, w)
    bound = tol.tol_conv * (1.0 + t.norm)
    half = spectral_norm(parallel_sum(t, w, tol).matrix - t.matrix / 2)
    if half > bound:
        raise HalfLemmaViolated(f"T : W differs from T/2 by {half:.3e}")
    out = []
    for k, lam in enumerate(lambda_sequence(LAMBDA_CAP, k_max), start=1):
        lhs = parallel_sum(t.scaled(float(lam)), w, tol)
        gap = spectral_norm(lhs.matrix - t.matrix * (lam / (1.0 + lam)))
        if gap > bound:
            raise IdentityDrift(k, float(lam), gap)
        out.append((lam, gap))
    return out
