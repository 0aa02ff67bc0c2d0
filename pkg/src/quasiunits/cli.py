"""Command-line interface: ``quasiunits <command> ...``.

Matrix arguments are files in the JSON matrix format (see ``matfile``).
Reports go to standard output, human-readable by default and JSON with
``--json``.  ``--out`` writes the main result matrix to a file.

Exit status: 0 on success, 1 when a computation is refused (not solvable,
cross-check failure, failing suites), 2 for bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NotSolvable, QuasiUnitsError, UnknownSuite
from .forms_iso import Form, phi
from .galois import PolarityPair, adjunction_sides, closure, is_closed_element
from .matfile import matrix_to_doc, read_matrix, write_matrix
from .parallel_ops import parallel_diff, parallel_sum, parallel_sum_direct
from .psd_core import PsdMatrix, spectral_norm
from .quasi_unit import ando_infimum, is_quasi_unit, quasi_join, quasi_meet
from .short_lebesgue import generalized_short, lebesgue_decompose, short_aux, short_iterative_trace, short_schur
from .suites import RunConfig, replay_trial, run_suites, suite_names
from .tolerances import Tolerances, get_tolerances, tolerances


class Report:
    """Collects named values and matrices; prints them as text or JSON."""

    def __init__(self, command: str):
        self.command = command
        self.values: dict = {}
        self.matrices: dict = {}

    def value(self, name, v):
        self.values[name] = v

    def matrix(self, name, m):
        self.matrices[name] = m.matrix if isinstance(m, PsdMatrix) else np.asarray(m)

    def emit(self, as_json: bool, out=None):
        out = out or sys.stdout
        if as_json:
            doc = {"command": self.command, **self.values}
            doc["matrices"] = {k: matrix_to_doc(v, k) for k, v in self.matrices.items() if v.size}
            json.dump(doc, out, indent=2, default=_jsonable)
            out.write("\n")
            return
        for k, v in self.values.items():
            if isinstance(v, float):
                v = f"{v:.6e}"
            elif isinstance(v, str) and "\n" in v:
                v = "\n" + v
            print(f"{k}: {v}", file=out)
        for k, m in self.matrices.items():
            print(f"{k} =", file=out)
            print(_fmt(m), file=out)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _vector(v) -> list:
    v = np.asarray(v).ravel()
    if np.iscomplexobj(v) and np.any(v.imag):
        return [[float(x.real), float(x.imag)] for x in v]
    return [float(x) for x in v.real]


def _fmt(m: np.ndarray) -> str:
    if m.size == 0:
        return "  (empty)"
    if np.iscomplexobj(m) and not np.any(m.imag):
        m = m.real
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        return "  " + np.array2string(m).replace("\n", "\n  ")


def _load(path) -> PsdMatrix:
    return PsdMatrix(read_matrix(path))


def _load_form(path) -> Form:
    doc = json.loads(Path(path).read_text())
    return Form.from_doc(doc)


def _write(args, m, name="result"):
    if getattr(args, "out", None):
        write_matrix(args.out, m.matrix if isinstance(m, PsdMatrix) else m, name)


# -- commands ---------------------------------------------------------------
def cmd_parsum(args, rep: Report) -> int:
    a, b = _load(args.A), _load(args.B)
    s = parallel_sum(a, b)
    rep.value("commutativity_gap", spectral_norm(s.matrix - parallel_sum(b, a).matrix))
    rep.value("direct_formula_gap", spectral_norm(s.matrix - parallel_sum_direct(a, b).matrix))
    rep.matrix("A:B", s)
    _write(args, s)
    return 0


def cmd_pardiff(args, rep: Report) -> int:
    s, t = _load(args.S), _load(args.T)
    try:
        r = parallel_diff(s, t)
    except NotSolvable as exc:
        rep.value("solvable", False)
        rep.value("reason", exc.reason)
        rep.value("detail", str(exc))
        if exc.direction is not None:
            rep.value("direction", _vector(exc.direction))
        return 1
    rep.value("solvable", True)
    rep.value("postcondition_gap", spectral_norm(parallel_sum(r, t).matrix - s.matrix))
    rep.matrix("S÷T", r)
    _write(args, r)
    return 0


def cmd_short(args, rep: Report) -> int:
    a, b = _load(args.A), _load(args.B)
    if args.method == "aux":
        out = short_aux(a, b)
    elif args.method == "schur":
        out = short_schur(a, b)
    elif args.method == "iter":
        trace = short_iterative_trace(a, b)
        rep.value("iterations", trace.steps)
        rep.value("final_step_gap", trace.gaps[-1] if trace.gaps else 0.0)
        out = trace.result
    else:
        aux, schur = short_aux(a, b), short_schur(a, b)
        it = short_iterative_trace(a, b)
        rep.value("aux_vs_schur", spectral_norm(aux.matrix - schur.matrix))
        rep.value("aux_vs_iter", spectral_norm(aux.matrix - it.result.matrix))
        rep.value("schur_vs_iter", spectral_norm(schur.matrix - it.result.matrix))
        rep.value("iterations", it.steps)
        out = generalized_short(a, b)
    rep.value("method", args.method)
    rep.matrix("[A]B", out)
    _write(args, out)
    return 0


def cmd_lebesgue(args, rep: Report) -> int:
    a, b = _load(args.A), _load(args.B)
    dec = lebesgue_decompose(a, b)
    rep.value("reconstruction_gap", spectral_norm(dec.regular.matrix + dec.singular_part.matrix - b.matrix))
    rep.value("unique", dec.unique)
    rep.value("alpha_min", dec.alpha_min)
    rep.matrix("regular", dec.regular)
    rep.matrix("singular", dec.singular_part)
    _write(args, dec.regular, "regular")
    if args.out_singular:
        write_matrix(args.out_singular, dec.singular_part.matrix, "singular")
    return 0


def cmd_quasiunit(args, rep: Report) -> int:
    a, b = _load(args.A), _load(args.B)
    cert = is_quasi_unit(a, b)
    if args.json:
        rep.values.update(cert.to_dict())
    else:
        rep.value("certificate", cert.report())
    return 0


def cmd_infimum(args, rep: Report) -> int:
    a, b = _load(args.A), _load(args.B)
    res = ando_infimum(a, b, samples=args.samples)
    rep.value("exists", res.exists)
    if res.exists:
        rep.value("witness", res.witness)
        rep.matrix("inf", res.value)
        _write(args, res.value)
    rep.matrix("[A]B", res.short_ab)
    rep.matrix("[B]A", res.short_ba)
    return 0


def cmd_lattice(args, rep: Report) -> int:
    s, t, b = _load(args.S), _load(args.T), _load(args.B)
    op = quasi_meet if args.op == "meet" else quasi_join
    out = op(s, t, b)
    rep.value("op", args.op)
    rep.matrix(args.op, out)
    _write(args, out)
    return 0


def cmd_galois(args, rep: Report) -> int:
    ctx = PolarityPair.of(_load(args.ref))
    t = _load(args.t)
    rep.value("check", args.check)
    if args.check == "closure":
        c = closure(t, ctx)
        rep.matrix("closure", c.gram)
        _write(args, c.gram)
    elif args.check == "closed":
        rep.value("closed", is_closed_element(t, ctx))
    else:
        if args.u is None:
            raise ValueError("galois --check adjunction needs a second file (u)")
        left, right = adjunction_sides(_load(args.u), t, ctx)
        rep.value("v_le_alpha_u", left)
        rep.value("beta_v_le_u", right)
        rep.value("adjunction_holds", left == right)
        return 0 if left == right else 1
    return 0


def cmd_phi(args, rep: Report) -> int:
    t, w = _load_form(args.t), _load_form(args.w)
    out = phi(t, w)
    rep.value("rank_t", out.dim)
    rep.matrix("Phi_t(w)", out)
    if args.out and out.dim:
        write_matrix(args.out, out.matrix, "phi")
    return 0


def _dims(text: str) -> tuple:
    try:
        lo, _, hi = text.partition("..")
        return int(lo), int(hi or lo)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from exc


def cmd_selftest(args, rep: Report) -> int:
    if args.list:
        for name in suite_names():
            print(name)
        return 0
    names = tuple(s for s in args.suites.split(",") if s) if args.suites else None
    if args.replay is not None:
        if not names or len(names) != 1:
            raise ValueError("--replay needs exactly one suite in --suites")
        ok, gap, msg, mats = replay_trial(names[0], args.replay, args.dims, get_tolerances())
        rep.value("suite", names[0])
        rep.value("seed", args.replay)
        rep.value("ok", ok)
        rep.value("gap", gap)
        if msg:
            rep.value("message", msg)
        for k, m in mats.items():
            rep.matrix(k, m.gram if isinstance(m, Form) else m)
        return 0 if ok else 1
    cfg = RunConfig(seed=args.seed, trials=args.trials, dim_range=args.dims, tolerances=get_tolerances(), suites=names)
    reports = run_suites(cfg, workers=args.workers)
    failed = [r for r in reports if not r.ok]
    if args.dump_dir:
        _dump_failures(Path(args.dump_dir), failed)
    if args.json:
        rep.value("config", {"seed": cfg.seed, "trials": cfg.trials, "dims": list(cfg.dim_range)})
        rep.value("reports", [r.to_dict(timing=not args.no_timing) for r in reports])
        rep.value("all_passed", not failed)
    else:
        for r in reports:
            line = r.line()
            if args.no_timing:
                line = line[: line.rfind("  (")]
            print(line)
            for f in r.failures:
                print(f"    trial {f['trial']} seed {f['seed']}: {f['message']}")
        print(f"{len(reports) - len(failed)}/{len(reports)} suites passed")
    return 1 if failed else 0


def _dump_failures(root: Path, reports) -> None:
    for r in reports:
        for f in r.failures:
            d = root / r.suite / str(f["seed"])
            d.mkdir(parents=True, exist_ok=True)
            (d / "failure.txt").write_text(f["message"] + "\n")
            for name, doc in f["matrices"].items():
                (d / f"{name}.mat").write_text(json.dumps(doc) + "\n")


# -- parser -----------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable report")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write the result matrix to this file")

    p = argparse.ArgumentParser(prog="quasiunits", description="Parallel sums, shorts and quasi-units of PSD matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--json", action="store_true", default=False, help="machine-readable report")
    p.add_argument("--out", default=None, help="write the result matrix to this file")
    p.add_argument("--tol-conv", type=float, default=None, help="override the convergence tolerance")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, *files):
        sp = sub.add_parser(name, parents=[common], help=help_)
        for f in files:
            sp.add_argument(f)
        sp.set_defaults(func=fn)
        return sp

    add("parsum", cmd_parsum, "parallel sum A:B", "A", "B")
    add("pardiff", cmd_pardiff, "parallel difference S÷T", "S", "T")
    sp = add("short", cmd_short, "generalized short [A]B", "A", "B")
    sp.add_argument("--method", choices=["aux", "schur", "iter", "all"], default="all")
    sp = add("lebesgue", cmd_lebesgue, "Lebesgue decomposition of B with respect to A", "A", "B")
    sp.add_argument("--out-singular", default=None, help="write the singular part here")
    add("quasiunit", cmd_quasiunit, "is A a quasi-unit of B?", "A", "B")
    sp = add("infimum", cmd_infimum, "Ando infimum of A and B", "A", "B")
    sp.add_argument("--samples", type=int, default=50, help="sampled lower bounds to check against")
    sp = add("lattice", cmd_lattice, "meet or join of two B-quasi-units", "S", "T", "B")
    sp.add_argument("--op", choices=["meet", "join"], required=True)
    sp = add("galois", cmd_galois, "Galois connection checks for reference w", "t")
    sp.add_argument("u", nargs="?", default=None)
    sp.add_argument("--ref", required=True, help="reference form w")
    sp.add_argument("--check", choices=["adjunction", "closure", "closed"], required=True)
    add("phi", cmd_phi, "Phi_t(w) for forms t, w", "t", "w")
    sp = add("selftest", cmd_selftest, "run the property suites")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--dims", type=_dims, default=(2, 6), help="dimension range a..b")
    sp.add_argument("--suites", default=None, help="comma-separated suite names (default: all)")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--replay", type=int, default=None, help="rerun one trial seed of a single suite")
    sp.add_argument("--dump-dir", default=None, help="write failing inputs here as matrix files")
    sp.add_argument("--no-timing", action="store_true", help="omit wall times from the report")
    sp.add_argument("--list", action="store_true", help="list suite names and exit")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rep = Report(args.command)
    try:
        tol = get_tolerances()
        if args.tol_conv is not None:
            tol = tol.with_(tol_conv=args.tol_conv)
        with tolerances(tol):
            code = args.func(args, rep)
    except (QuasiUnitsError, OSError, ValueError) as exc:
        code = 2 if isinstance(exc, (ValueError, OSError, UnknownSuite)) else 1
        if args.json:
            json.dump({"command": args.command, "error": type(exc).__name__, "message": str(exc)}, sys.stdout)
            sys.stdout.write("\n")
        else:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    if not (args.command == "selftest" and (args.list or not args.json and args.replay is None)):
        rep.emit(args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
