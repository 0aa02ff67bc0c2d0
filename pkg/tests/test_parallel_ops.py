import numpy as np
import pytest
import scipy.optimize
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import psd_matrices, psd_pairs, rand_psd
from quasiunits.errors import CrossCheckFailure, DimensionMismatch, NotSolvable
from quasiunits.parallel_ops import (
    parallel_diff,
    parallel_sum,
    parallel_sum_direct,
    scalar_parallel_check,
    variational_parallel_sum_value,
)
from quasiunits.psd_core import PsdMatrix, loewner_leq, spectral_norm

I2 = np.eye(2)
ONES = np.ones((2, 2))


def brute_force_value(a, b, x):
    """inf_y <A(x-y),x-y> + <By,y> by a generic quasi-Newton minimizer."""
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    x = np.asarray(x, complex)
    n = len(x)

    def f(z):
        y = z[:n] + 1j * z[n:]
        d = x - y
        return float(np.real(np.vdot(d, a @ d) + np.vdot(y, b @ y)))

    best = min(
        (scipy.optimize.minimize(f, z0, method="BFGS", options={"gtol": 1e-12}) for z0 in (np.zeros(2 * n), np.r_[x.real, x.imag])),
        key=lambda r: r.fun,
    )
    return best.fun


def polarized_matrix(a, b):
    """Recover a real symmetric A:B from brute-force quadratic values by polarization."""
    n = a.shape[0]
    q = lambda v: brute_force_value(a, b, v)
    e = np.eye(n)
    m = np.zeros((n, n))
    for i in range(n):
        m[i, i] = q(e[i])
        for j in range(i):
            m[i, j] = m[j, i] = (q(e[i] + e[j]) - q(e[i] - e[j])) / 4
    return m


def exact_parallel_sum(a, b):
    a, b = sp.Matrix(a), sp.Matrix(b)
    return a * (a + b).pinv() * b


# -- examples ----------------------------------------------------------------
@pytest.mark.parametrize(
    "a, b, want",
    [
        (I2, I2, I2 / 2),
        (np.diag([3.0, 1.0]), np.zeros((2, 2)), np.zeros((2, 2))),
        (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), np.zeros((2, 2))),
        (np.diag([1.0, 0.0]), I2, np.diag([0.5, 0.0])),
    ],
)
def test_parallel_sum_examples(a, b, want):
    assert np.allclose(parallel_sum(a, b).matrix, want, atol=1e-14)


def test_parallel_sum_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        parallel_sum(np.eye(2), np.eye(3))


@pytest.mark.parametrize(
    "a, b",
    [
        ([[2, 1], [1, 1]], [[1, 0], [0, 0]]),
        ([[1, 1], [1, 1]], [[3, 0], [0, 1]]),
        ([[4, 2, 0], [2, 2, 0], [0, 0, 0]], [[1, 0, 0], [0, 0, 0], [0, 0, 5]]),
    ],
)
def test_parallel_sum_matches_exact_rational(a, b):
    exact = np.array(exact_parallel_sum(a, b).evalf(30), dtype=float)
    assert np.allclose(parallel_sum(np.array(a, float), np.array(b, float)).matrix, exact, atol=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_parallel_sum_matches_polarized_brute_force(seed):
    rng = np.random.default_rng(seed)
    a, b = rand_psd(rng, 3, real=True), rand_psd(rng, 3, real=True)
    ref = polarized_matrix(a.matrix.real, b.matrix.real)
    assert np.allclose(parallel_sum(a, b).matrix, ref, atol=1e-6 * (1 + a.norm + b.norm))


def test_factorized_route_survives_scale_gap():
    # B : (n A) with n = 2^40: the naive pseudo-inverse loses the O(1) block
    a = np.diag([1.0, 0.0])
    b = np.array([[2.0, 1.0], [1.0, 1.0]])
    got = parallel_sum(b, a * 2.0**40).matrix
    assert np.allclose(got, np.diag([1.0, 0.0]), atol=1e-9)


# -- properties --------------------------------------------------------------
@given(psd_pairs())
def test_commutative(pair):
    a, b = pair
    assert spectral_norm(parallel_sum(a, b).matrix - parallel_sum(b, a).matrix) <= 1e-7 * (1 + a.norm + b.norm)


@given(psd_pairs())
def test_agrees_with_direct_formula(pair):
    a, b = pair
    assert spectral_norm(parallel_sum(a, b).matrix - parallel_sum_direct(a, b).matrix) <= 1e-6 * (1 + a.norm + b.norm)


@given(st.integers(1, 5), st.integers(0, 2**31))
def test_associative(n, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rand_psd(rng, n) for _ in range(3))
    lhs = parallel_sum(parallel_sum(a, b), c).matrix
    rhs = parallel_sum(a, parallel_sum(b, c)).matrix
    assert spectral_norm(lhs - rhs) <= 1e-7 * (1 + a.norm + b.norm + c.norm)


@given(psd_pairs(), st.integers(0, 2**31))
def test_monotone_and_upper_bound(pair, seed):
    a, b = pair
    c = rand_psd(np.random.default_rng(seed), a.dim)
    s = parallel_sum(a, b)
    assert loewner_leq(s, a) and loewner_leq(s, b)
    assert loewner_leq(s, parallel_sum(a + c, b))


# -- variational oracle ------------------------------------------------------
def test_variational_examples():
    assert variational_parallel_sum_value(I2, I2, [1.0, 0.0]) == pytest.approx(0.5, abs=1e-9)
    assert variational_parallel_sum_value(np.diag([3.0, 2.0]), np.zeros((2, 2)), [1.0, 2.0]) == pytest.approx(0.0, abs=1e-9)
    assert variational_parallel_sum_value(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), [1.0, 1.0]) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_variational_matches_brute_force(seed):
    rng = np.random.default_rng(100 + seed)
    a, b = rand_psd(rng, 3), rand_psd(rng, 3)
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    want = brute_force_value(a.matrix, b.matrix, x)
    assert variational_parallel_sum_value(a, b, x) == pytest.approx(want, rel=1e-6, abs=1e-8)


@given(psd_pairs(), st.integers(0, 2**31))
def test_closed_form_matches_variational(pair, seed):
    a, b = pair
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(a.dim) + 1j * rng.standard_normal(a.dim)
    value = variational_parallel_sum_value(a, b, x)
    assert abs(parallel_sum(a, b).quad(x) - value) <= 1e-6 * (1 + value)


def test_variational_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        variational_parallel_sum_value(I2, I2, [1.0, 2.0, 3.0])


# -- parallel difference -----------------------------------------------------
def test_pardiff_examples():
    assert np.allclose(parallel_diff(I2 / 2, I2).matrix, I2)
    assert np.allclose(parallel_diff(np.zeros((2, 2)), np.diag([1.0, 2.0])).matrix, 0)


def test_pardiff_not_solvable_definiteness():
    with pytest.raises(NotSolvable) as info:
        parallel_diff(2 * I2, I2)
    assert info.value.reason == "definiteness"
    assert info.value.direction is not None


def test_pardiff_equal_arguments_not_solvable():
    # x : I = I has no solution: sup along y = s x grows like (1 + 2s)|x|^2
    with pytest.raises(NotSolvable) as info:
        parallel_diff(I2, I2)
    assert info.value.reason == "range"
    s, t = I2, I2
    x, y = info.value.point, info.value.direction
    vals = [np.real(np.vdot(x + k * y, s @ (x + k * y)) - np.vdot(k * y, t @ (k * y))) for k in (1.0, 10.0, 100.0)]
    assert vals[0] < vals[1] < vals[2]


def test_pardiff_range_failure_direction_diverges():
    s = np.diag([1.0, 1.0])
    t = np.diag([3.0, 1.0])
    with pytest.raises(NotSolvable) as info:
        parallel_diff(s, t)
    assert info.value.reason == "range"
    x, y = info.value.point, info.value.direction
    f = lambda k: np.real(np.vdot(x + k * y, s @ (x + k * y)) - np.vdot(k * y, t @ (k * y)))
    assert f(1e3) > f(1e1) > f(0)


def test_pardiff_matches_sup_formula():
    # sup_y S[x+y] - T[y] evaluated by maximizing the concave quadratic
    rng = np.random.default_rng(7)
    t = rand_psd(rng, 3, 3, real=True)
    x0 = rand_psd(rng, 3, 2, real=True)
    s = parallel_sum(x0, t)
    r = parallel_diff(s, t)
    sm, tm = s.matrix.real, t.matrix.real
    for _ in range(3):
        x = rng.standard_normal(3)
        res = scipy.optimize.minimize(lambda y: -((x + y) @ sm @ (x + y) - y @ tm @ y), np.zeros(3), method="BFGS")
        assert -res.fun == pytest.approx(r.quad(x), rel=1e-6, abs=1e-8)


@given(psd_pairs())
def test_always_solvable(pair):
    t, w = pair
    s = parallel_sum(t, w)
    r = parallel_diff(s, w)
    assert spectral_norm(parallel_sum(r, w).matrix - s.matrix) <= 1e-7 * (1 + t.norm + w.norm)


@given(psd_pairs())
def test_minimal_solution(pair):
    t, x0 = pair
    s = parallel_sum(x0, t)
    r = parallel_diff(s, t)
    assert loewner_leq(r, x0)


def test_pardiff_postcondition_guard(monkeypatch):
    import quasiunits.parallel_ops as po

    monkeypatch.setattr(po, "parallel_sum", lambda a, b, tol=None: PsdMatrix(np.eye(2)))
    with pytest.raises(CrossCheckFailure):
        po.parallel_diff(I2 / 2, I2)


# -- scalar identity ---------------------------------------------------------
def test_scalar_examples():
    assert scalar_parallel_check(I2, 1, 1)
    assert scalar_parallel_check(np.zeros((2, 2)), 2, 5)
    assert scalar_parallel_check(ONES, 1, 3)
    assert np.allclose(parallel_sum(ONES, 3 * ONES).matrix, 0.75 * ONES)


@given(psd_matrices(), st.floats(0.1, 10), st.floats(0.1, 10))
def test_scalar_identity(t, lam, mu):
    assert scalar_parallel_check(t, lam, mu, atol=1e-10)


def test_scalar_rejects_nonpositive():
    with pytest.raises(ValueError):
        scalar_parallel_check(I2, 0, 1)
