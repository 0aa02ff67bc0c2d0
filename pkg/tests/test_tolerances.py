import math

import pytest

from quasiunits.tolerances import Tolerances, configure, get_tolerances, resolve, tolerances


def test_defaults():
    t = Tolerances()
    assert (t.tol_sym, t.tol_psd, t.tol_rank, t.tol_order, t.tol_conv) == (1e-12, 1e-10, 1e-9, 1e-8, 1e-7)


@pytest.mark.parametrize("bad", [{"tol_conv": -1.0}, {"tol_rank": math.inf}, {"tol_sym": math.nan}])
def test_rejects_invalid(bad):
    with pytest.raises(ValueError):
        Tolerances(**bad)


def test_conv_must_exceed_rank():
    with pytest.raises(ValueError):
        Tolerances(tol_rank=1e-6, tol_conv=1e-7)


def test_context_override_is_scoped():
    base = get_tolerances()
    with tolerances(tol_conv=1e-5) as t:
        assert get_tolerances() is t
        assert resolve(None).tol_conv == 1e-5
    assert get_tolerances() == base


def test_configure_global():
    old = get_tolerances()
    try:
        configure(tol_order=1e-6)
        assert get_tolerances().tol_order == 1e-6
    finally:
        configure(old)
    assert get_tolerances() == old


def test_explicit_wins():
    t = Tolerances(tol_conv=1e-4)
    with tolerances(tol_conv=1e-5):
        assert resolve(t) is t
