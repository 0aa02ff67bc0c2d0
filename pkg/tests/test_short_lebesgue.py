import numpy as np
import pytest
import sympy as sp
from hypothesis import given

from conftest import psd_pairs, rand_psd
from quasiunits.errors import CrossCheckFailure, DimensionMismatch, NoConvergence
from quasiunits.parallel_ops import parallel_sum
from quasiunits.psd_core import loewner_leq, spectral_norm
from quasiunits.quasi_unit import is_quasi_unit
from quasiunits import short_lebesgue as sl
from quasiunits.short_lebesgue import (
    build_aux_space,
    generalized_short,
    is_absolutely_continuous,
    is_singular,
    lebesgue_decompose,
    multivalued_part,
    short_aux,
    short_iterative,
    short_iterative_trace,
    short_schur,
)

I2 = np.eye(2)
ONES = np.ones((2, 2))
GOLD_A = np.diag([1.0, 0.0])
GOLD_B = np.array([[2.0, 1.0], [1.0, 1.0]])


def exact_short(a, b):
    """lim_{n -> oo} B:(nA) for invertible rational B, computed symbolically."""
    n = sp.Symbol("n", positive=True)
    a, b = sp.Matrix(a), sp.Matrix(b)
    expr = (b * (n * a + b).inv() * (n * a)).applyfunc(sp.simplify)
    return np.array(expr.applyfunc(lambda e: sp.limit(e, n, sp.oo)).evalf(30), dtype=float)


# -- auxiliary space ---------------------------------------------------------
def test_aux_space_examples():
    aux = build_aux_space(np.diag([4.0, 0.0]))
    assert aux.rank == 1
    assert np.allclose(np.abs(aux.J[:, 0]), [2.0, 0.0])
    aux = build_aux_space(I2)
    assert aux.rank == 2
    assert np.allclose(aux.J @ aux.Jstar, I2)
    assert build_aux_space(np.zeros((2, 2))).rank == 0


@given(psd_pairs())
def test_aux_space_invariants(pair):
    b, _ = pair
    aux = build_aux_space(b)
    assert spectral_norm(aux.J @ aux.Jstar - b.matrix) <= 1e-7 * (1 + b.norm)
    assert np.linalg.matrix_rank(aux.J) == aux.rank if aux.rank else aux.J.shape[1] == 0
    if aux.rank:
        assert np.allclose(aux.left_inverse() @ aux.J, np.eye(aux.rank), atol=1e-8)


def test_multivalued_part_examples():
    assert multivalued_part(GOLD_A, ONES).dim == 1
    assert multivalued_part(I2, I2).dim == 0
    m = multivalued_part(GOLD_A, np.diag([2.0, 3.0]))
    assert m.dim == 1


# -- three routes ------------------------------------------------------------
@pytest.mark.parametrize("fn", [short_aux, short_schur, short_iterative, generalized_short])
@pytest.mark.parametrize(
    "a, b, want",
    [
        (GOLD_A, np.diag([2.0, 3.0]), np.diag([2.0, 0.0])),
        (GOLD_A, ONES, np.zeros((2, 2))),
        (GOLD_A, GOLD_B, np.diag([1.0, 0.0])),
        (np.zeros((2, 2)), GOLD_B, np.zeros((2, 2))),
        (GOLD_B, GOLD_B, GOLD_B),
    ],
)
def test_short_examples(fn, a, b, want):
    atol = 1e-6 if fn is short_iterative else 1e-10
    assert np.allclose(fn(a, b).matrix, want, atol=atol)


def test_golden_case_to_1e10():
    assert spectral_norm(generalized_short(GOLD_A, GOLD_B).matrix - np.diag([1.0, 0.0])) <= 1e-10


@pytest.mark.parametrize(
    "a, b",
    [
        ([[1, 0, 0], [0, 0, 0], [0, 0, 0]], [[3, 1, 1], [1, 2, 0], [1, 0, 2]]),
        ([[1, 1, 0], [1, 1, 0], [0, 0, 0]], [[2, 1, 0], [1, 2, 1], [0, 1, 2]]),
        ([[2, 0, 1], [0, 0, 0], [1, 0, 1]], [[4, 1, 1], [1, 3, 1], [1, 1, 2]]),
    ],
)
def test_short_matches_symbolic_limit(a, b):
    want = exact_short(a, b)
    a, b = np.array(a, float), np.array(b, float)
    assert np.allclose(short_aux(a, b).matrix, want, atol=1e-10)
    assert np.allclose(short_schur(a, b).matrix, want, atol=1e-10)
    assert np.allclose(short_iterative(a, b).matrix, want, atol=1e-6)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        generalized_short(I2, np.eye(3))


@given(psd_pairs())
def test_three_routes_agree(pair):
    a, b = pair
    scale = 1 + b.norm
    x, s, it = short_aux(a, b), short_schur(a, b), short_iterative(a, b)
    assert spectral_norm(x.matrix - s.matrix) <= 1e-7 * scale
    assert spectral_norm(x.matrix - it.matrix) <= 1e-6 * scale
    assert loewner_leq(x, b)


@given(psd_pairs())
def test_idempotent(pair):
    a, b = pair
    once = generalized_short(a, b)
    assert spectral_norm(generalized_short(a, once).matrix - once.matrix) <= 1e-7 * (1 + b.norm)


@given(psd_pairs())
def test_iterates_nondecreasing(pair):
    a, b = pair
    trace = short_iterative_trace(a, b)
    assert trace.worst_monotonicity_violation <= 1e-8 * (1 + b.norm)
    assert trace.steps >= 1


@given(psd_pairs())
def test_short_is_quasi_unit_and_extremal_sum(pair):
    a, b = pair
    s = generalized_short(a, b)
    assert is_quasi_unit(s, b).verdict
    assert parallel_sum(b - s, a + s).norm <= 1e-7 * (1 + a.norm + b.norm)


def test_no_convergence(monkeypatch):
    monkeypatch.setattr(sl, "ITERATION_CAP", 2)
    with pytest.raises(NoConvergence) as info:
        short_iterative(GOLD_A, GOLD_B)
    assert info.value.last_gap > 0


def test_crosscheck_failure(monkeypatch):
    monkeypatch.setattr(sl, "short_schur", lambda a, b, tol=None: b)
    with pytest.raises(CrossCheckFailure):
        generalized_short(GOLD_A, GOLD_B)


# -- predicates --------------------------------------------------------------
def test_absolute_continuity_examples():
    assert is_absolutely_continuous(GOLD_B, GOLD_B)
    assert not is_absolutely_continuous(np.diag([2.0, 3.0]), GOLD_A)
    assert is_absolutely_continuous(np.diag([2.0, 0.0]), GOLD_A)


def test_singularity_examples():
    assert is_singular(GOLD_A, np.diag([0.0, 1.0]))
    assert not is_singular(GOLD_B, GOLD_B)
    assert is_singular(ONES, GOLD_A)


def test_singularity_disagreement_raises(monkeypatch):
    monkeypatch.setattr(sl, "parallel_sum", lambda a, b, tol=None: a)
    with pytest.raises(CrossCheckFailure):
        is_singular(GOLD_A, np.diag([0.0, 1.0]))


# -- Lebesgue decomposition ---------------------------------------------------
def test_lebesgue_example():
    d = lebesgue_decompose(GOLD_A, GOLD_B)
    assert np.allclose(d.regular.matrix, np.diag([1.0, 0.0]), atol=1e-10)
    assert np.allclose(d.singular_part.matrix, ONES, atol=1e-10)
    assert d.unique
    assert d.alpha_min == pytest.approx(1.0, abs=1e-9)


def test_lebesgue_trivial_cases():
    d = lebesgue_decompose(GOLD_B, GOLD_B)
    assert np.allclose(d.regular.matrix, GOLD_B) and np.allclose(d.singular_part.matrix, 0)
    d = lebesgue_decompose(np.zeros((2, 2)), GOLD_B)
    assert np.allclose(d.regular.matrix, 0) and np.allclose(d.singular_part.matrix, GOLD_B)


@given(psd_pairs())
def test_lebesgue_properties(pair):
    a, b = pair
    d = lebesgue_decompose(a, b)
    assert spectral_norm(d.regular.matrix + d.singular_part.matrix - b.matrix) <= 1e-9 * (1 + b.norm)
    assert is_absolutely_continuous(d.regular, a)
    assert is_singular(a, d.singular_part)
    assert d.unique
    if d.alpha_min is not None and a.rank:
        assert loewner_leq(d.regular, a.scaled(d.alpha_min * (1 + 1e-7) + 1e-9))


def test_alpha_min_is_sharp():
    rng = np.random.default_rng(3)
    a, b = rand_psd(rng, 4, 2), rand_psd(rng, 4, 3)
    d = lebesgue_decompose(a, b)
    assert d.alpha_min > 0
    assert not loewner_leq(d.regular, a.scaled(0.9 * d.alpha_min))
