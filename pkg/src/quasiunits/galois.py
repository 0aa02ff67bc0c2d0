"""The parallel-sum Galois connection attached to a reference form ``w``.

``alpha(t) = t : w`` maps all forms onto the image ``{t : w}``, and
``beta(s) = s ÷ w`` maps the image back.  For ``s`` in the image and any
``u``::

    s <= alpha(u)   iff   beta(s) <= u

so the pair is antitone once the source is read in the opposite order.  The
closure ``beta(alpha(t))`` is ``D_w t``, and its fixed points are exactly the
forms almost dominated by ``w``, which in finite dimension means
``ran t ⊆ ran w``.

Membership in the image is decided by trying the parallel difference: when
it is not solvable we raise :class:`NotInImage`.  The opposite order is never
built as a type; each check spells out the inequality it evaluates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CrossCheckFailure, NotInImage, NotSolvable
from .forms_iso import Form, _as_form, form_leq, form_parallel_sum, form_short
from .parallel_ops import parallel_diff
from .psd_core import check_same_dim, spectral_norm
from .short_lebesgue import range_included
from .tolerances import Tolerances, resolve

__all__ = [
    "PolarityPair",
    "alpha",
    "beta",
    "closure",
    "adjunction_sides",
    "check_adjunction",
    "is_closed_element",
]


@dataclass(frozen=True)
class PolarityPair:
    reference: Form
    tol: Tolerances = field(default_factory=resolve)

    @classmethod
    def of(cls, w, tol: Tolerances | None = None) -> "PolarityPair":
        tol = resolve(tol)
        return cls(_as_form(w, tol), tol)


def _prep(t, ctx: PolarityPair) -> Form:
    t = _as_form(t, ctx.tol)
    check_same_dim(t.gram, ctx.reference.gram)
    return t


def alpha(t, ctx: PolarityPair) -> Form:
    """``t : w``."""
    t = _prep(t, ctx)
    return form_parallel_sum(t, ctx.reference, ctx.tol)


def beta(s, ctx: PolarityPair) -> Form:
    """``s ÷ w``; raises :class:`NotInImage` when ``s`` is not of the form ``t : w``."""
    s = _prep(s, ctx)
    try:
        g = parallel_diff(s.gram, ctx.reference.gram, ctx.tol)
    except NotSolvable as exc:
        raise NotInImage(f"form is not in the image of alpha: {exc}") from exc
    return Form(g)


def _gap_bound(ctx: PolarityPair, *forms: Form) -> float:
    return ctx.tol.tol_conv * (1.0 + ctx.reference.gram.norm + sum(f.gram.norm for f in forms))


def closure(t, ctx: PolarityPair, *, crosscheck: bool = True) -> Form:
    """``beta(alpha(t)) = D_w t``, computed as a short and checked against the composite."""
    t = _prep(t, ctx)
    out = form_short(ctx.reference, t, ctx.tol)
    if crosscheck:
        via = beta(alpha(t, ctx), ctx)
        gap = spectral_norm(via.gram.matrix - out.gram.matrix)
        if gap > _gap_bound(ctx, t):
            raise CrossCheckFailure("closure: D_w t differs from (t:w) ÷ w", gap)
    return out


def adjunction_sides(u, v, ctx: PolarityPair) -> tuple[bool, bool]:
    """``(v <= alpha(u), beta(v) <= u)``; ``v`` must lie in the image of ``alpha``."""
    u, v = _prep(u, ctx), _prep(v, ctx)
    left = form_leq(v, alpha(u, ctx), ctx.tol)
    right = form_leq(beta(v, ctx), u, ctx.tol)
    return left, right


def check_adjunction(u, v, ctx: PolarityPair) -> bool:
    left, right = adjunction_sides(u, v, ctx)
    return left == right


def is_closed_element(t, ctx: PolarityPair) -> bool:
    """Whether ``closure(t) = t``; must agree with ``ran t ⊆ ran w``."""
    t = _prep(t, ctx)
    gap = spectral_norm(closure(t, ctx).gram.matrix - t.gram.matrix)
    fixed = gap <= _gap_bound(ctx, t)
    dominated = range_included(t.gram, ctx.reference.gram, ctx.tol)
    if fixed != dominated:
        raise CrossCheckFailure(
            "closed-element test disagrees with range inclusion",
            gap,
            f"fixed point says {fixed}, range inclusion says {dominated}",
        )
    return fixed
