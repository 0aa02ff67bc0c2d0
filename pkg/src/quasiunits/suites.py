"""Property suites: every invariant of the toolkit as a seeded, replayable check.

A suite is a function of one :class:`Trial`.  The trial owns a generator
seeded from ``(cfg.seed, suite name, trial index)``, draws its dimension from
``cfg.dim_range`` and records the largest normalized gap it measured.  A
failing trial keeps the matrices it was built from, in the matrix file
format, and its seed replays it exactly through :func:`replay_trial`.
"""
from __future__ import annotations

import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import HalfLemmaViolated, NotSolvable, QuasiUnitsError, UnknownSuite
from .forms_iso import (
    Form,
    form_parallel_sum,
    form_quasi_unit,
    form_short,
    phi,
    phi_inverse,
)
from .galois import PolarityPair, adjunction_sides, alpha, beta, closure, is_closed_element
from .matfile import matrix_to_doc
from .parallel_ops import (
    parallel_diff,
    parallel_sum,
    scalar_parallel_check,
    variational_parallel_sum_value,
)
from .psd_core import (
    PsdMatrix,
    Subspace,
    loewner_leq,
    pseudo_inverse,
    range_projection,
    spectral_norm,
    sqrt_psd,
    subspace_intersection,
)
from .quasi_unit import (
    ando_infimum,
    is_quasi_unit,
    lambda_iteration_check,
    lambda_sequence,
    projection_to_quasiunit,
    quasi_join,
    quasi_meet,
    quasiunit_to_projection,
    sample_common_lower_bounds,
)
from .random_gen import (
    gen_random_non_quasiunit,
    gen_random_psd,
    gen_random_quasiunit,
    random_below,
    random_contraction,
    random_projection,
)
from .short_lebesgue import (
    generalized_short,
    is_absolutely_continuous,
    is_singular,
    lebesgue_decompose,
    range_included,
    short_aux,
    short_iterative_trace,
    short_schur,
)
from .tolerances import Tolerances, tolerances

__all__ = ["RunConfig", "SuiteReport", "SUITES", "suite_names", "run_suites", "run_suite", "replay_trial", "Trial"]

DIM_CAP = 12


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    trials: int = 100
    dim_range: tuple = (2, 6)
    tolerances: Tolerances = field(default_factory=Tolerances)
    suites: tuple | None = None  # None means every suite

    def __post_init__(self):
        lo, hi = self.dim_range
        if not 1 <= lo <= hi <= DIM_CAP:
            raise ValueError(f"dim_range must satisfy 1 <= min <= max <= {DIM_CAP}, got {self.dim_range}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "dim_range", (int(lo), int(hi)))
        if self.suites is not None:
            object.__setattr__(self, "suites", tuple(self.suites))

    def selected(self) -> list:
        names = list(SUITES) if self.suites is None else list(self.suites)
        for name in names:
            if name not in SUITES:
                raise UnknownSuite(name)
        return names


@dataclass
class SuiteReport:
    suite: str
    passed: int
    failed: int
    worst_gap: float
    failing_seeds: list
    wall_time: float
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self, *, timing: bool = True) -> dict:
        out = {
            "suite": self.suite,
            "passed": self.passed,
            "failed": self.failed,
            "worst_gap": self.worst_gap,
            "failing_seeds": list(self.failing_seeds),
            "failures": list(self.failures),
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out

    def line(self) -> str:
        mark = "PASS" if self.ok else "FAIL"
        return (
            f"{mark} {self.suite:<34} {self.passed:>4} passed {self.failed:>3} failed"
            f"  worst gap {self.worst_gap:.2e}  ({self.wall_time:.2f}s)"
        )


class TrialFailure(Exception):
    pass


class Trial:
    """State of one randomized trial: generator, dimension, gaps and inputs."""

    def __init__(self, seed: int, dim_range, tol: Tolerances):
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.n = int(self.rng.integers(dim_range[0], dim_range[1] + 1))
        self.tol = tol
        self.gap = 0.0
        self.matrices: dict = {}

    # generation
    def rank(self, lo: int = 0) -> int:
        return int(self.rng.integers(min(lo, self.n), self.n + 1))

    def psd(self, name: str, rank: int | None = None, *, lo: int = 0) -> PsdMatrix:
        r = self.rank(lo) if rank is None else rank
        m = gen_random_psd(self.rng, self.n, r, self.tol)
        self.keep(**{name: m})
        return m

    def keep(self, **mats):
        for k, v in mats.items():
            self.matrices[k] = v

    def uniform(self, lo=0.0, hi=1.0) -> float:
        return float(self.rng.uniform(lo, hi))

    def coin(self, p: float = 0.5) -> bool:
        return bool(self.rng.random() < p)

    # checks
    def close(self, what: str, x, y, scale: float = 1.0, thr: float | None = None):
        x, y = _arr(x), _arr(y)
        gap = spectral_norm(x - y) / scale if x.size else 0.0
        self.small(what, gap, thr)

    def small(self, what: str, gap: float, thr: float | None = None):
        thr = self.tol.tol_conv if thr is None else thr
        self.gap = max(self.gap, float(gap))
        if gap > thr:
            raise TrialFailure(f"{what}: gap {gap:.3e} > {thr:.1e}")

    def expect(self, what: str, cond: bool):
        if not cond:
            raise TrialFailure(what)

    def leq(self, what: str, a, b):
        self.expect(f"{what} (Loewner order fails)", loewner_leq(_g(a), _g(b), self.tol))


def _g(x):
    return x.gram if isinstance(x, Form) else x


def _arr(x) -> np.ndarray:
    x = _g(x)
    return x.matrix if isinstance(x, PsdMatrix) else np.asarray(x)


def _norms(*ms) -> float:
    return 1.0 + sum(_g(m).norm for m in ms)


SUITES: dict = {}


def suite(name: str):
    def deco(fn):
        SUITES[name] = fn
        return fn

    return deco


def suite_names() -> list:
    return list(SUITES)


# -- psd_core ---------------------------------------------------------------
@suite("psd.pinv_penrose")
def _pinv(tr: Trial):
    a = tr.psd("A")
    p = pseudo_inverse(a).matrix
    am = a.matrix
    tr.close("A A+ A = A", am @ p @ am, am, _norms(a))
    tr.close("A+ A A+ = A+", p @ am @ p, p, 1.0 + spectral_norm(p))
    tr.close("(A A+)* = A A+", (am @ p).conj().T, am @ p)
    tr.close("(A+ A)* = A+ A", (p @ am).conj().T, p @ am)


@suite("psd.sqrt")
def _sqrt(tr: Trial):
    a = tr.psd("A")
    r = sqrt_psd(a)
    tr.close("sqrt(A)^2 = A", r.matrix @ r.matrix, a, _norms(a))
    tr.close("ran sqrt(A) = ran A", range_projection(r), range_projection(a))


@suite("psd.loewner_order")
def _loewner(tr: Trial):
    a, c, d = tr.psd("A"), tr.psd("C"), tr.psd("D")
    tr.leq("reflexive", a, a)
    ac = a + c
    acd = ac + d
    tr.leq("A <= A + C", a, ac)
    tr.leq("A + C <= A + C + D", ac, acd)
    tr.leq("transitive", a, acd)
    if c.norm > 1e-3:
        tr.expect("A + C <= A must fail for C != 0", not loewner_leq(ac, a, tr.tol))
    b = tr.psd("B")
    if loewner_leq(a, b, tr.tol) and loewner_leq(b, a, tr.tol):
        tr.close("antisymmetry", a, b, _norms(a, b), thr=10 * tr.tol.tol_order)
    eps = PsdMatrix(a.matrix + 1e-3 * tr.tol.tol_order * c.matrix / max(c.norm, 1.0), tr.tol, hermitize=True)
    tr.expect("tol_order-close matrices compare both ways", loewner_leq(a, eps, tr.tol) and loewner_leq(eps, a, tr.tol))


@suite("psd.intersection")
def _intersection(tr: Trial):
    n = tr.n
    shared = int(tr.rng.integers(0, n + 1))
    ks = int(tr.rng.integers(shared, n + 1))
    kt = int(tr.rng.integers(shared, n + 1))
    common = tr.rng.standard_normal((n, shared)) + 1j * tr.rng.standard_normal((n, shared))

    def span(k):
        extra = tr.rng.standard_normal((n, k - shared)) + 1j * tr.rng.standard_normal((n, k - shared))
        return Subspace.span(np.hstack([common, extra]))

    s, t = span(ks), span(kt)
    got = subspace_intersection(s, t, tr.tol)
    eye = np.eye(n)
    m = (eye - s.projector()) + (eye - t.projector())
    # a nonzero m has norm >= 1, so a near-zero m means S = T = C^n
    oracle = eye if spectral_norm(m) < 0.5 else scipy.linalg.null_space(m, rcond=1e-8)
    tr.expect(f"intersection dim {got.dim} vs null-space oracle {oracle.shape[1]}", got.dim == oracle.shape[1])
    tr.close("intersection projector", got.projector(), oracle @ oracle.conj().T)


# -- parallel_ops -----------------------------------------------------------
@suite("parsum.commutative")
def _comm(tr: Trial):
    a, b = tr.psd("A"), tr.psd("B")
    tr.close("A:B = B:A", parallel_sum(a, b), parallel_sum(b, a), _norms(a, b))


@suite("parsum.associative")
def _assoc(tr: Trial):
    a, b, c = tr.psd("A"), tr.psd("B"), tr.psd("C")
    lhs = parallel_sum(parallel_sum(a, b), c)
    rhs = parallel_sum(a, parallel_sum(b, c))
    tr.close("(A:B):C = A:(B:C)", lhs, rhs, _norms(a, b, c))


@suite("parsum.monotone")
def _mono(tr: Trial):
    a, b, c = tr.psd("A"), tr.psd("B"), tr.psd("C")
    tr.leq("A <= A' implies A:B <= A':B", parallel_sum(a, b), parallel_sum(a + c, b))


@suite("parsum.upper_bound")
def _upper(tr: Trial):
    a, b = tr.psd("A"), tr.psd("B")
    s = parallel_sum(a, b)
    tr.leq("A:B <= A", s, a)
    tr.leq("A:B <= B", s, b)


@suite("parsum.scalar")
def _scalar(tr: Trial):
    t = tr.psd("T")
    lam, mu = tr.uniform(0.1, 10.0), tr.uniform(0.1, 10.0)
    got = parallel_sum(t.scaled(lam), t.scaled(mu))
    tr.close("lam T : mu T", got, t.matrix * (lam * mu / (lam + mu)), _norms(t), thr=1e-10)
    tr.expect("scalar_parallel_check", scalar_parallel_check(t, lam, mu, atol=1e-10))


@suite("parsum.oracle")
def _oracle(tr: Trial):
    n = min(tr.n, 5)
    a = gen_random_psd(tr.rng, n, int(tr.rng.integers(0, n + 1)))
    b = gen_random_psd(tr.rng, n, int(tr.rng.integers(0, n + 1)))
    x = tr.rng.standard_normal(n) + 1j * tr.rng.standard_normal(n)
    tr.keep(A=a, B=b)
    closed = parallel_sum(a, b).quad(x)
    value = variational_parallel_sum_value(a, b, x)
    tr.small("closed form vs variational infimum", abs(closed - value) / (1.0 + value))


@suite("pardiff.minimal")
def _pardiff_min(tr: Trial):
    t, x0 = tr.psd("T"), tr.psd("X0")
    s = parallel_sum(x0, t)
    tr.keep(S=s)
    r = parallel_diff(s, t)
    tr.close("(S÷T):T = S", parallel_sum(r, t), s, _norms(s, t))
    candidates = [x0]
    kern = t.kernel_basis
    for _ in range(3):
        if kern.shape[1]:
            v = kern @ (tr.rng.standard_normal(kern.shape[1]) + 0j)
            candidates.append(r + PsdMatrix(np.outer(v, v.conj()), tr.tol, hermitize=True))
    for c in candidates:
        gap = spectral_norm(parallel_sum(c, t).matrix - s.matrix) / _norms(s, t)
        if gap <= tr.tol.tol_conv:
            tr.leq("S÷T is below every sampled solution", r, c)


@suite("pardiff.always_solvable")
def _pardiff_solv(tr: Trial):
    t, w = tr.psd("T"), tr.psd("W")
    s = parallel_sum(t, w)
    try:
        r = parallel_diff(s, w)
    except NotSolvable as exc:
        raise TrialFailure(f"(T:W)÷W reported not solvable: {exc}") from exc
    tr.close("((T:W)÷W):W = T:W", parallel_sum(r, w), s, _norms(t, w))


# -- short_lebesgue ---------------------------------------------------------
@suite("short.agreement")
def _short_agree(tr: Trial):
    a, b = tr.psd("A"), tr.psd("B")
    aux, schur = short_aux(a, b), short_schur(a, b)
    it = short_iterative_trace(a, b).result
    scale = _norms(b)
    tr.close("short_aux vs short_schur", aux, schur, scale)
    tr.close("short_aux vs short_iterative", aux, it, scale, thr=10 * tr.tol.tol_conv)
    tr.close("short_schur vs short_iterative", schur, it, scale, thr=10 * tr.tol.tol_conv)


@suite("short.idempotent")
def _short_idem(tr: Trial):
    a, b = tr.psd("A"), tr.psd("B")
    s = generalized_short(a, b)
    tr.close("[A]([A]B) = [A]B", generalized_short(a, s), s, _norms(b))


@suite("short.is_quasi_unit")
def _short_qu(tr: Trial):
    a, b = tr.psd("A"), tr.psd("B")
    tr.expect("[A]B is a quasi-unit of B", is_quasi_unit(generalized_short(a, b), b).verdict)


@suite("short.extremal_sum")
def _short_extremal(tr: Trial):
    a, b = tr.psd("A"), tr.psd("B")
    s = generalized_short(a, b)
    tr.small("(B-[A]B):(A+[A]B) = 0", parallel_sum(b - s, a + s).norm / _norms(a, b))


@suite("short.monotone_convergence")
def _short_mono(tr: Trial):
    a, b = tr.psd("A"), tr.psd("B")
    trace = short_iterative_trace(a, b)
    tr.small("iterates nondecreasing", trace.worst_monotonicity_violation / _norms(b), tr.tol.tol_order)


@suite("lebesgue.decomposition")
def _lebesgue(tr: Trial):
    a, b = tr.psd("A"), tr.psd("B")
    dec = lebesgue_decompose(a, b)
    tr.close("regular + singular = B", dec.regular + dec.singular_part, b, _norms(b), thr=1e-9)
    tr.expect("regular part absolutely continuous", is_absolutely_continuous(dec.regular, a))
    tr.expect("singular part singular", is_singular(a, dec.singular_part))
    tr.expect("decomposition unique", dec.unique)


# -- quasi_unit -------------------------------------------------------------
def _qu(tr: Trial, b, name):
    q = gen_random_quasiunit(tr.rng, b, tr.tol)
    tr.keep(**{name: q})
    return q


@suite("quasi.equivalence")
def _qu_eq(tr: Trial):
    b = tr.psd("B", lo=1)
    cert = is_quasi_unit(_qu(tr, b, "A"), b)
    tr.small("fixed point", cert.fixed_point_gap / _norms(b))
    tr.expect("all characterizations accept", cert.verdict and all(cert.votes.values()))


@suite("quasi.non_equivalence")
def _qu_neq(tr: Trial):
    b = tr.psd("B", lo=1)
    a = gen_random_non_quasiunit(tr.rng, b, tr.tol)
    tr.keep(A=a)
    cert = is_quasi_unit(a, b)
    tr.expect("all characterizations reject", not cert.verdict and not any(cert.votes.values()))


@suite("quasi.psi_order")
def _psi_order(tr: Trial):
    b = tr.psd("B")
    r = b.rank
    q = random_projection(tr.rng, r)
    k = int(np.rint(np.real(np.trace(q)))) if r else 0
    if k:
        inner = random_projection(tr.rng, k)
        basis = np.linalg.eigh(q)[1][:, r - k:]
        p = basis @ inner @ basis.conj().T
    else:
        p = q
    pq, qq = projection_to_quasiunit(p, b), projection_to_quasiunit(q, b)
    tr.keep(P_image=pq, Q_image=qq)
    tr.leq("P <= Q implies Psi(P) <= Psi(Q)", pq, qq)
    if r:
        p2, q2 = quasiunit_to_projection(pq, b), quasiunit_to_projection(qq, b)
        tr.close("recovered P", p2, p)
        tr.close("recovered Q", q2, q)
        tr.leq("recovered projections keep the order", PsdMatrix(p2, tr.tol, hermitize=True), PsdMatrix(q2, tr.tol, hermitize=True))


def _meet(s, t, b):
    return quasi_meet(s, t, b, check=False)


def _join(s, t, b):
    return quasi_join(s, t, b, check=False)


@suite("quasi.lattice_laws")
def _lattice(tr: Trial):
    b = tr.psd("B")
    s, t, u = _qu(tr, b, "S"), _qu(tr, b, "T"), _qu(tr, b, "U")
    sc = _norms(b)
    m_st, j_st = _meet(s, t, b), _join(s, t, b)
    tr.expect("meet is a quasi-unit", is_quasi_unit(m_st, b).verdict)
    tr.expect("join is a quasi-unit", is_quasi_unit(j_st, b).verdict)
    tr.close("meet idempotent", _meet(s, s, b), s, sc)
    tr.close("join idempotent", _join(s, s, b), s, sc)
    tr.close("meet commutative", m_st, _meet(t, s, b), sc)
    tr.close("join commutative", j_st, _join(t, s, b), sc)
    tr.close("meet associative", _meet(m_st, u, b), _meet(s, _meet(t, u, b), b), sc)
    tr.close("join associative", _join(j_st, u, b), _join(s, _join(t, u, b), b), sc)
    tr.close("absorption meet(S, join(S,T))", _meet(s, j_st, b), s, sc)
    tr.close("absorption join(S, meet(S,T))", _join(s, m_st, b), s, sc)


@suite("quasi.meet_coincidence")
def _meet_coin(tr: Trial):
    b = tr.psd("B")
    s, t = _qu(tr, b, "S"), _qu(tr, b, "T")
    m = _meet(s, t, b)
    tr.close("meet = [S]T", m, generalized_short(s, t), _norms(b))
    tr.close("meet = [T]S", m, generalized_short(t, s), _norms(b))


@suite("quasi.infimum_with_quasi_unit")
def _inf_qu(tr: Trial):
    t = tr.psd("T")
    w = _qu(tr, t, "W")
    u = random_below(tr.rng, t, tr.tol)
    tr.keep(U=u)
    res = ando_infimum(w, u)
    tr.expect("infimum of a quasi-unit and an element of [0, T] exists", res.exists)
    tr.close("W ∧ U = [W]U", res.value, generalized_short(w, u), _norms(t))


@suite("quasi.disjoint_part")
def _qu_disjoint(tr: Trial):
    w, t = tr.psd("W"), tr.psd("T")
    s = generalized_short(w, t)
    tr.small("[W]T : (T - [W]T) = 0", parallel_sum(s, t - s).norm / _norms(w, t))


@suite("quasi.lambda_recursion")
def _lam(tr: Trial):
    w = tr.psd("W")
    t = _qu(tr, w, "T")
    expected = [1, 3, 15, 255, 65535, 4294967295]
    tr.expect("lambda sequence", lambda_sequence() == expected)
    pairs = lambda_iteration_check(t, w, len(expected))
    tr.expect("every lambda_k checked", [p[0] for p in pairs] == expected)
    for _, gap in pairs:
        tr.small("(l T):W = l/(1+l) T", gap / _norms(t))


@suite("quasi.half_lemma_fails")
def _half_fail(tr: Trial):
    w = tr.psd("W", lo=1)
    t = gen_random_non_quasiunit(tr.rng, w, tr.tol)
    tr.keep(T=t)
    try:
        lambda_iteration_check(t, w, 6)
    except HalfLemmaViolated:
        return
    raise TrialFailure("half-lemma precondition accepted a non-quasi-unit")


# -- infimum ----------------------------------------------------------------
@suite("infimum.ando")
def _ando(tr: Trial):
    a = tr.psd("A")
    mode = int(tr.rng.integers(0, 3))
    if mode == 0:
        b = a + tr.psd("R")
    elif mode == 1:
        b = tr.psd("B")
    else:
        b = _qu(tr, a + tr.psd("R"), "B")
    tr.keep(B=b)
    res = ando_infimum(a, b, samples=0)
    if mode == 0:
        tr.expect("A <= B gives an infimum", res.exists)
        tr.close("inf(A, B) = A when A <= B", res.value, a, _norms(a, b))
    if not res.exists:
        tr.expect("non-existence needs incomparable shorts",
                  not loewner_leq(res.short_ab, res.short_ba) and not loewner_leq(res.short_ba, res.short_ab))
        return
    tr.leq("infimum below A", res.value, a)
    tr.leq("infimum below B", res.value, b)
    for c in sample_common_lower_bounds(a, b, 50, tr.rng):
        tr.leq("sampled common lower bound below the infimum", c, res.value)


# -- forms_iso --------------------------------------------------------------
def _interval_pair(tr: Trial):
    t = Form(tr.psd("t"))
    w2 = random_below(tr.rng, t.gram, tr.tol)
    w1 = random_below(tr.rng, w2, tr.tol)
    tr.keep(w1=w1, w2=w2)
    return t, Form(w1), Form(w2)


@suite("forms.order_iso")
def _order_iso(tr: Trial):
    t, w1, w2 = _interval_pair(tr)
    tr.leq("Phi keeps order", phi(t, w1), phi(t, w2))
    r = t.gram.rank
    if r:
        a2 = random_contraction(tr.rng, r)
        root = sqrt_psd(PsdMatrix(a2, tr.tol, hermitize=True)).matrix
        a1 = root @ random_contraction(tr.rng, r) @ root
        tr.leq("Phi^-1 keeps order", phi_inverse(t, a1), phi_inverse(t, a2))


@suite("forms.convexity")
def _convex(tr: Trial):
    t, u, v = _interval_pair(tr)
    v = Form(random_below(tr.rng, t.gram, tr.tol))
    tr.keep(v=v.gram)
    c = tr.uniform()
    mix = Form(u.gram.scaled(c) + v.gram.scaled(1 - c))
    want = c * phi(t, u).matrix + (1 - c) * phi(t, v).matrix
    tr.close("Phi(c u + (1-c) v)", phi(t, mix), want)


@suite("forms.round_trip")
def _round(tr: Trial):
    t, w, _ = _interval_pair(tr)
    tr.close("Phi^-1(Phi(w)) = w", phi_inverse(t, phi(t, w)), w, _norms(t), thr=1e-8)
    r = t.gram.rank
    if r:
        a = random_contraction(tr.rng, r)
        tr.close("Phi(Phi^-1(A)) = A", phi(t, phi_inverse(t, a)), a, thr=1e-8)


@suite("forms.parsum_functorial")
def _functorial(tr: Trial):
    t, w = Form(tr.psd("t")), Form(tr.psd("w"))
    s = t + w
    out = form_parallel_sum(t, w, check=True)
    lhs = phi(s, out)
    if lhs.dim:
        tr.close("Phi(t:w) = Phi(t):Phi(w)", lhs, parallel_sum(phi(s, t), phi(s, w)))


@suite("forms.quasi_unit_transport")
def _transport(tr: Trial):
    t = Form(tr.psd("t", lo=1))
    if tr.coin():
        w = Form(gen_random_quasiunit(tr.rng, t.gram, tr.tol))
        want = True
    else:
        w = Form(gen_random_non_quasiunit(tr.rng, t.gram, tr.tol))
        want = False
    tr.keep(w=w.gram)
    rep = form_quasi_unit(w, t)
    tr.expect(f"form-level tests unanimous ({rep})", rep.unanimous)
    tr.expect(f"verdict {rep.verdict}, constructed as {want}", rep.verdict == want)


@suite("forms.disjoint_part")
def _forms_disjoint(tr: Trial):
    w, t = Form(tr.psd("w")), Form(tr.psd("t"))
    d = form_short(w, t)
    tr.small("D_w t : (t - D_w t) = 0", form_parallel_sum(d, t - d).gram.norm / _norms(w, t))


# -- galois -----------------------------------------------------------------
def _ctx(tr: Trial) -> PolarityPair:
    return PolarityPair.of(tr.psd("w"), tr.tol)


@suite("galois.antitone")
def _antitone(tr: Trial):
    ctx = _ctx(tr)
    t2 = tr.psd("t2")
    t1 = random_below(tr.rng, t2, tr.tol)
    tr.keep(t1=t1)
    tr.leq("t1 <= t2 implies alpha(t1) <= alpha(t2)", alpha(t1, ctx), alpha(t2, ctx))
    tr.expect("connection inequality for v = alpha(t1), u = t2", all(adjunction_sides(t2, alpha(t1, ctx), ctx)))


@suite("galois.closure_contractive")
def _contract(tr: Trial):
    ctx = _ctx(tr)
    t = tr.psd("t")
    tr.leq("closure(t) <= t", closure(t, ctx), t)


@suite("galois.closure_idempotent")
def _idem(tr: Trial):
    ctx = _ctx(tr)
    t = tr.psd("t")
    c = closure(t, ctx)
    tr.close("closure(closure(t)) = closure(t)", closure(c, ctx), c, _norms(t))
    tr.close("closure(t) = D_w t", c, form_short(ctx.reference, t), _norms(t))


@suite("galois.non_injective")
def _noninj(tr: Trial):
    ctx = _ctx(tr)
    t = tr.psd("t")
    d = closure(t, ctx).gram
    u = d + random_below(tr.rng, t - d, tr.tol)
    tr.keep(u=u)
    tr.close("alpha(u) = alpha(t) on [D_w t, t]", alpha(u, ctx), alpha(t, ctx), _norms(t, ctx.reference))


@suite("galois.bijection_closed")
def _bij(tr: Trial):
    ctx = _ctx(tr)
    c1 = closure(tr.psd("t1"), ctx)
    c2 = closure(tr.psd("t2"), ctx)
    sc = _norms(c1, c2, ctx.reference)
    tr.close("beta(alpha(c)) = c", beta(alpha(c1, ctx), ctx), c1, sc)
    same_image = spectral_norm(alpha(c1, ctx).gram.matrix - alpha(c2, ctx).gram.matrix) / sc <= tr.tol.tol_conv
    if same_image:
        tr.close("alpha injective on closed elements", c1, c2, sc)


@suite("galois.identity_chain")
def _chain(tr: Trial):
    ctx = _ctx(tr)
    t = tr.psd("t")
    w = ctx.reference
    tw = form_parallel_sum(t, w)
    sc = _norms(t, w)
    tr.close("t:w = (D_w t):w", tw, form_parallel_sum(form_short(w, t), w), sc)
    tr.close("t:w = D_w(t:w)", tw, form_short(w, tw), sc)


@suite("galois.order_transfer")
def _transfer(tr: Trial):
    ctx = _ctx(tr)
    t = tr.psd("t")
    mode = int(tr.rng.integers(0, 3))
    if mode == 0:
        s = t + tr.psd("R")
    elif mode == 1:
        s = closure(t, ctx).gram + tr.psd("R")
    else:
        s = tr.psd("s")
    tr.keep(s=s)
    w = ctx.reference
    lhs = loewner_leq(form_parallel_sum(t, w).gram, form_parallel_sum(s, w).gram, tr.tol)
    rhs = loewner_leq(form_short(w, t).gram, form_short(w, s).gram, tr.tol)
    tr.expect(f"t:w <= s:w is {lhs} but D_w t <= D_w s is {rhs}", lhs == rhs)


@suite("galois.adjunction")
def _adjunction(tr: Trial):
    ctx = _ctx(tr)
    mode = int(tr.rng.integers(0, 4))
    u = tr.psd("u")
    if mode == 0:
        v = alpha(u, ctx)
    elif mode == 1:
        v = alpha(random_below(tr.rng, u, tr.tol), ctx)
    elif mode == 2:
        v = alpha(tr.psd("t"), ctx)
        u = beta(v, ctx).gram + tr.psd("R")
        tr.keep(u=u)
    else:
        v = alpha(tr.psd("t"), ctx)
    tr.keep(v=v.gram)
    left, right = adjunction_sides(u, v, ctx)
    tr.expect(f"v <= alpha(u) is {left} but beta(v) <= u is {right}", left == right)
    if mode < 3:
        tr.expect("constructed instance satisfies both sides", left and right)


@suite("galois.closed_elements")
def _closed(tr: Trial):
    ctx = _ctx(tr)
    if tr.coin():
        t = random_below(tr.rng, ctx.reference.gram, tr.tol).scaled(tr.uniform(0.1, 5.0))
    else:
        t = tr.psd("t")
    tr.keep(t=t)
    want = range_included(t, ctx.reference.gram, tr.tol)
    tr.expect("closed elements are the range-dominated forms", is_closed_element(t, ctx) == want)


# -- runner -----------------------------------------------------------------
def trial_seed(seed: int, name: str, index: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()), index))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def _dump(matrices: dict) -> dict:
    out = {}
    for k, v in matrices.items():
        m = _arr(v)
        if m.size:
            out[k] = matrix_to_doc(m, k)
    return out


def replay_trial(name: str, seed: int, dim_range, tol: Tolerances | None = None) -> tuple:
    """Run one trial; returns ``(ok, gap, message, matrices)``."""
    if name not in SUITES:
        raise UnknownSuite(name)
    tol = tol or Tolerances()
    with tolerances(tol):
        tr = Trial(seed, dim_range, tol)
        try:
            SUITES[name](tr)
            return True, tr.gap, "", tr.matrices
        except (TrialFailure, QuasiUnitsError, np.linalg.LinAlgError) as exc:
            return False, tr.gap, f"{type(exc).__name__}: {exc}", tr.matrices


def run_suite(name: str, cfg: RunConfig) -> SuiteReport:
    if name not in SUITES:
        raise UnknownSuite(name)
    start = time.perf_counter()
    passed = failed = 0
    worst = 0.0
    seeds, failures = [], []
    for i in range(cfg.trials):
        seed = trial_seed(cfg.seed, name, i)
        ok, gap, msg, mats = replay_trial(name, seed, cfg.dim_range, cfg.tolerances)
        worst = max(worst, gap)
        if ok:
            passed += 1
        else:
            failed += 1
            seeds.append(seed)
            failures.append({"trial": i, "seed": seed, "message": msg, "matrices": _dump(mats)})
    return SuiteReport(name, passed, failed, worst, seeds, time.perf_counter() - start, failures)


def _run_one(args):
    return run_suite(*args)


def run_suites(cfg: RunConfig, workers: int = 1) -> list:
    """Run the configured suites; reports come back in suite order."""
    names = cfg.selected()
    if workers <= 1 or len(names) <= 1:
        return [run_suite(n, cfg) for n in names]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, [(n, cfg) for n in names]))
