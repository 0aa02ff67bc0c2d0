import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rand_psd
from quasiunits.errors import CrossCheckFailure, DimensionMismatch, NotInImage
from quasiunits.forms_iso import Form, form_leq, form_short
from quasiunits.galois import (
    PolarityPair,
    adjunction_sides,
    alpha,
    beta,
    check_adjunction,
    closure,
    is_closed_element,
)
from quasiunits.psd_core import spectral_norm

W = np.diag([1.0, 0.0])
T = np.diag([2.0, 3.0])


def gram(f):
    return f.gram.matrix


def close(f, g, eps=1e-7):
    f = gram(f) if isinstance(f, Form) else np.asarray(f)
    g = gram(g) if isinstance(g, Form) else np.asarray(g)
    return spectral_norm(f - g) <= eps * (1 + spectral_norm(f) + spectral_norm(g))


def random_ctx(rng, n):
    return PolarityPair.of(rand_psd(rng, n, int(rng.integers(0, n + 1))))


def random_form(rng, n):
    return Form(rand_psd(rng, n, int(rng.integers(0, n + 1))))


def test_alpha_examples():
    ctx = PolarityPair.of(W)
    assert np.allclose(gram(alpha(np.zeros((2, 2)), ctx)), 0)
    assert np.allclose(gram(alpha(W, ctx)), W / 2)
    assert np.allclose(gram(alpha(T, ctx)), np.diag([2 / 3, 0.0]))


def test_beta_examples():
    w = np.array([[2.0, 1.0], [1.0, 1.0]])
    ctx = PolarityPair.of(w)
    assert np.allclose(gram(beta(w / 2, ctx)), w)
    assert np.allclose(gram(beta(np.zeros((2, 2)), ctx)), 0)
    ctx = PolarityPair.of(W)
    assert np.allclose(gram(beta(alpha(T, ctx), ctx)), np.diag([2.0, 0.0]))


def test_beta_outside_image():
    ctx = PolarityPair.of(W)
    with pytest.raises(NotInImage):
        beta(np.diag([0.0, 1.0]), ctx)
    with pytest.raises(NotInImage):
        beta(W, ctx)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        alpha(np.eye(3), PolarityPair.of(W))


def test_closure_examples():
    ctx = PolarityPair.of(W)
    assert np.allclose(gram(closure(np.diag([5.0, 0.0]), ctx)), np.diag([5.0, 0.0]))
    assert np.allclose(gram(closure(T, ctx)), np.diag([2.0, 0.0]))
    assert np.allclose(gram(closure(np.zeros((2, 2)), ctx)), 0)


def test_closure_crosscheck(monkeypatch):
    import quasiunits.galois as gal

    monkeypatch.setattr(gal, "form_short", lambda w, t, tol=None: Form(np.zeros((2, 2))))
    with pytest.raises(CrossCheckFailure):
        gal.closure(T, PolarityPair.of(W))
    assert np.allclose(gram(gal.closure(T, PolarityPair.of(W), crosscheck=False)), 0)


def test_adjunction_examples():
    ctx = PolarityPair.of(W)
    u = np.diag([0.0, 5.0])
    v = alpha(np.diag([3.0, 0.0]), ctx)
    assert np.allclose(gram(v), np.diag([0.75, 0.0]))
    assert adjunction_sides(u, v, ctx) == (False, False)
    assert check_adjunction(u, v, ctx)
    assert adjunction_sides(T, alpha(T, ctx), ctx) == (True, True)
    v = alpha(np.diag([4.0, 1.0]), ctx)
    assert adjunction_sides(beta(v, ctx), v, ctx) == (True, True)


def test_adjunction_needs_image():
    with pytest.raises(NotInImage):
        adjunction_sides(T, np.diag([0.0, 1.0]), PolarityPair.of(W))


def test_closed_examples():
    ctx = PolarityPair.of(W)
    assert is_closed_element(np.diag([3.0, 0.0]), ctx)
    assert is_closed_element(W, ctx)
    assert not is_closed_element(np.diag([0.0, 1.0]), ctx)


@given(st.integers(1, 5), st.integers(0, 2**31))
def test_adjunction_random(n, seed):
    rng = np.random.default_rng(seed)
    ctx = random_ctx(rng, n)
    u = random_form(rng, n)
    v = alpha(random_form(rng, n), ctx)
    assert check_adjunction(u, v, ctx)
    # a u that makes both sides true
    assert adjunction_sides(beta(v, ctx) + u, v, ctx) == (True, True)


@given(st.integers(1, 5), st.integers(0, 2**31))
def test_alpha_monotone_closure_contractive_idempotent(n, seed):
    rng = np.random.default_rng(seed)
    ctx = random_ctx(rng, n)
    t1 = random_form(rng, n)
    t2 = t1 + random_form(rng, n)
    assert form_leq(alpha(t1, ctx), alpha(t2, ctx))
    c = closure(t2, ctx)
    assert form_leq(c, t2)
    assert close(closure(c, ctx), c)


@given(st.integers(1, 5), st.integers(0, 2**31))
def test_alpha_constant_on_interval(n, seed):
    rng = np.random.default_rng(seed)
    ctx = random_ctx(rng, n)
    t = random_form(rng, n)
    d = closure(t, ctx)
    lam = rng.uniform()
    u = d + (t - d) * lam
    assert close(alpha(u, ctx), alpha(t, ctx))


@given(st.integers(1, 5), st.integers(0, 2**31))
def test_bijection_on_closed_and_identity_chain(n, seed):
    rng = np.random.default_rng(seed)
    ctx = random_ctx(rng, n)
    t = random_form(rng, n)
    d = closure(t, ctx)
    assert close(beta(alpha(d, ctx), ctx), d)
    a = alpha(t, ctx)
    assert close(a, alpha(d, ctx))
    assert close(a, form_short(ctx.reference, a))
    assert is_closed_element(d, ctx)


@given(st.integers(1, 4), st.integers(0, 2**31))
def test_order_transfer(n, seed):
    rng = np.random.default_rng(seed)
    ctx = random_ctx(rng, n)
    t = random_form(rng, n)
    # s >= t makes the left side true; a random s tests the reverse direction too
    for s in (t + random_form(rng, n), random_form(rng, n)):
        lhs = form_leq(alpha(t, ctx), alpha(s, ctx))
        rhs = form_leq(closure(t, ctx), closure(s, ctx))
        assert lhs == rhs
