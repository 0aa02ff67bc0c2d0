"""Exception hierarchy.

Every error raised deliberately by the toolkit derives from
:class:`QuasiUnitsError`; the numerical-input ones also derive from
``ValueError`` so generic callers can catch them the usual way.
"""
from __future__ import annotations


class QuasiUnitsError(Exception):
    pass


class NonHermitianInput(QuasiUnitsError, ValueError):
    pass


class NotPositive(QuasiUnitsError, ValueError):
    """Input has an eigenvalue below the PSD clipping band."""


class DimensionMismatch(QuasiUnitsError, ValueError):
    pass


class FormatError(QuasiUnitsError, ValueError):
    """Malformed matrix or form file."""


class BadRank(QuasiUnitsError, ValueError):
    pass


class NotSolvable(QuasiUnitsError):
    """``x : T = S`` has no solution.

    ``reason`` is ``"definiteness"`` (T - S is not PSD) or ``"range"``
    (ran S is not contained in ran(T - S)); ``direction`` is a vector ``y``
    along which ``S[x + s*y] - T[s*y]`` grows without bound, with ``x`` the
    witness point (for the definiteness failure any ``x`` works and ``x`` is
    zero).
    """

    def __init__(self, reason: str, direction=None, point=None, detail: str = ""):
        self.reason = reason
        self.direction = direction
        self.point = point
        msg = f"parallel difference not solvable ({reason})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NoConvergence(QuasiUnitsError):
    def __init__(self, message: str, last_gap: float):
        self.last_gap = last_gap
        super().__init__(f"{message} (last gap {last_gap:.3e})")


class CrossCheckFailure(QuasiUnitsError):
    """Two routes that must agree did not."""

    def __init__(self, what: str, gap: float | None = None, detail: str = ""):
        self.what = what
        self.gap = gap
        msg = what
        if gap is not None:
            msg += f" (gap {gap:.3e})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NotInInterval(QuasiUnitsError, ValueError):
    pass


class NotAProjection(QuasiUnitsError, ValueError):
    pass


class NotQuasiUnit(QuasiUnitsError, ValueError):
    pass


class NotDominated(QuasiUnitsError, ValueError):
    pass


class NotInImage(QuasiUnitsError, ValueError):
    """A form is outside the image of ``t -> t:w``."""


class HalfLemmaViolated(QuasiUnitsError, ValueError):
    pass


class IdentityDrift(QuasiUnitsError):
    def __init__(self, k: int, lam: float, gap: float):
        self.k = k
        self.lam = lam
        self.gap = gap
        super().__init__(f"(lambda_k T):W identity drifted at k={k}, lambda={lam:g}: gap {gap:.3e}")


class UnknownSuite(QuasiUnitsError, KeyError):
    pass
