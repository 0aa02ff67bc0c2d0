"""Numerical tolerance policy shared by every approximate predicate.

All tolerances are dimensionless and relative; each check multiplies the
relevant one by a scale such as ``1 + ||B||``.  A process-wide default can be
replaced with :func:`configure`, and :func:`tolerances` overrides it inside a
``with`` block (the override is context-local, so it is thread safe).
"""
from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import asdict, dataclass, replace
from typing import Iterator


@dataclass(frozen=True)
class Tolerances:
    tol_sym: float = 1e-12
    tol_psd: float = 1e-10
    tol_rank: float = 1e-9
    tol_order: float = 1e-8
    tol_conv: float = 1e-7

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {value!r}")
        if not self.tol_conv > self.tol_rank:
            raise ValueError("tol_conv must exceed tol_rank")

    def with_(self, **changes) -> "Tolerances":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


_global = Tolerances()
_override: contextvars.ContextVar[Tolerances | None] = contextvars.ContextVar(
    "quasiunits_tolerances", default=None
)


def get_tolerances() -> Tolerances:
    """Return the tolerances in effect for the current context."""
    tol = _override.get()
    return _global if tol is None else tol


def configure(tol: Tolerances | None = None, **changes) -> Tolerances:
    """Replace the process-wide default tolerances and return the new value."""
    global _global
    base = _global if tol is None else tol
    _global = replace(base, **changes) if changes else base
    return _global


@contextlib.contextmanager
def tolerances(tol: Tolerances | None = None, **changes) -> Iterator[Tolerances]:
    """Temporarily override tolerances in the current context."""
    base = get_tolerances() if tol is None else tol
    new = replace(base, **changes) if changes else base
    token = _override.set(new)
    try:
        yield new
    finally:
        _override.reset(token)


def resolve(tol: Tolerances | None) -> Tolerances:
    return get_tolerances() if tol is None else tol
