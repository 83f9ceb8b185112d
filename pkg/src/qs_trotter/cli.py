"""Command-line front end (``qs-trotter``).

Exit codes: 0 pass, 1 fail, 2 invalid input, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .cocycle_sim import StepFunction, refinement, slice_cocycle
from .decompositions import dilate_to_unitary, gaussian_split, left_series_decomposition, right_series_decomposition
from .ito_algebra import (
    BlockGenerator,
    NotContractiveError,
    NotQuasicontractiveError,
    RecoveryError,
    classify,
    sample_qc,
    series_all,
)
from .numkit import DEFAULT_TOL, DimensionError, Tolerance, op_norm
from .qform import (
    bounded_to_form,
    intersect_frames,
    qf_defect_check,
    qf_three_factor_residual,
    qf_wills_residual,
    random_form,
    random_vector,
    FormVector,
)
from .serialize import (
    InputError,
    encode_matrix,
    generator_to_dict,
    load_generator,
    parse_json,
    step_function_from_dict,
)
from .toy_fock import auto_schedule, fit_slope, trotter_report, walk_cell

HEADER = "# qs-trotter v1"
EXIT_PASS, EXIT_FAIL, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 1, 2, 3

COMMANDS = (
    "classify",
    "compose",
    "decompose",
    "gaussian-split",
    "dilate",
    "trotter-sweep",
    "walk-sweep",
    "qform-check",
    "sample",
)


@dataclass
class ExperimentSpec:
    command: str
    inputs: list[str] = field(default_factory=list)
    window: tuple[float, float] = (0.0, 1.0)
    meshes: list[float] = field(default_factory=list)
    substeps: str = "auto"
    gprime: str | None = None
    g: str | None = None
    seed: int = 0
    tol: Tolerance = DEFAULT_TOL
    out: str = "csv"
    side: str = "left"
    d_h: int = 2
    d_k: int = 1
    beta: float = 0.0
    expect_slope: tuple[float, float] | None = None
    samples: int = 20

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        needs = {"classify": 1, "compose": 1, "decompose": 1, "gaussian-split": 1, "dilate": 1,
                 "trotter-sweep": 1, "walk-sweep": 1}
        if len(self.inputs) < needs.get(self.command, 0):
            raise InputError(f"{self.command} needs at least one --input")
        if self.command in ("decompose", "gaussian-split", "dilate", "classify", "walk-sweep") and len(self.inputs) != 1:
            raise InputError(f"{self.command} takes exactly one --input")
        if self.meshes and any(b >= a for a, b in zip(self.meshes, self.meshes[1:])):
            raise InputError("meshes must be strictly decreasing")
        if any(m <= 0 for m in self.meshes):
            raise InputError("meshes must be positive")
        r, t = self.window
        if not (0 <= r < t):
            raise InputError("window must satisfy 0 <= r < t")


# ---------------------------------------------------------------------------
# parsing


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise InputError(f"{what}: non-finite value")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qs-trotter", description="Stochastic generator algebra and Trotter sweeps.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("-i", "--input", action="append", default=[], help="generator JSON file (repeatable, ordered)")
    p.add_argument("--window", default="0,1", help="r,t")
    p.add_argument("--meshes", default="", help="strictly decreasing list a,b,c")
    p.add_argument("--substeps", default="auto", help="m, a list m1,m2,... or auto")
    p.add_argument("--gprime", default=None, help='step function JSON {"breaks":[...],"values":[[...]]}')
    p.add_argument("--g", default=None, help="step function JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None, help="relative tolerance override")
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    p.add_argument("--side", choices=("left", "right"), default="left", help="decompose: which series decomposition")
    p.add_argument("--d-h", dest="d_h", type=int, default=2)
    p.add_argument("--d-k", dest="d_k", type=int, default=1)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--samples", type=int, default=20, help="qform-check: number of random draws")
    p.add_argument("--expect-slope", default=None, help="lo,hi: fail unless the fitted slope lies in [lo, hi]")
    return p


def spec_from_args(ns: argparse.Namespace) -> ExperimentSpec:
    window = _floats(ns.window, "--window")
    if len(window) != 2:
        raise InputError("--window expects r,t")
    tol = DEFAULT_TOL
    if ns.tol is not None:
        if not (ns.tol >= 0 and math.isfinite(ns.tol)):
            raise InputError("--tol must be a nonnegative number")
        tol = Tolerance(ns.tol, DEFAULT_TOL.abs_floor)
    slope = None
    if ns.expect_slope:
        lo_hi = _floats(ns.expect_slope, "--expect-slope")
        if len(lo_hi) != 2:
            raise InputError("--expect-slope expects lo,hi")
        slope = (lo_hi[0], lo_hi[1])
    if ns.d_h < 1 or ns.d_k < 0:
        raise InputError("--d-h must be >= 1 and --d-k >= 0")
    spec = ExperimentSpec(
        command=ns.command,
        inputs=list(ns.input),
        window=(window[0], window[1]),
        meshes=_floats(ns.meshes, "--meshes") if ns.meshes else [],
        substeps=ns.substeps,
        gprime=ns.gprime,
        g=ns.g,
        seed=ns.seed,
        tol=tol,
        out=ns.out,
        side=ns.side,
        d_h=ns.d_h,
        d_k=ns.d_k,
        beta=ns.beta,
        expect_slope=slope,
        samples=ns.samples,
    )
    spec.validate()
    return spec


def _schedule(text: str) -> list[int] | str:
    if text == "auto":
        return "auto"
    try:
        ms = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--substeps: expected m, a list, or auto; got {text!r}") from None
    if not ms or any(m < 1 for m in ms):
        raise InputError("--substeps values must be positive integers")
    return ms


def _step(text: str | None, d_k: int, name: str) -> StepFunction:
    if text is None:
        return StepFunction.zero(d_k)
    try:
        return step_function_from_dict(parse_json(text, name), d_k)
    except InputError as e:
        raise InputError(f"{name}: {e}") from None


def _load_all(paths: Sequence[str]) -> list[BlockGenerator]:
    gens = [load_generator(p) for p in paths]
    dims = {(F.d_h, F.d_k) for F in gens}
    if len(dims) > 1:
        raise InputError(f"generators have mismatched dimensions {sorted(dims)}")
    return gens


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return "none"
    if isinstance(x, float):
        return repr(round(x, 12) + 0.0)
    return str(x)


def _num(x) -> str:
    return repr(float(x))


class Output:
    def __init__(self, mode: str):
        self.mode = mode
        self.buf = io.StringIO()
        self.writer = csv.writer(self.buf, lineterminator="\n")
        if mode == "csv":
            self.buf.write(HEADER + "\n")

    def row(self, values) -> None:
        self.writer.writerow(values)

    def line(self, text: str) -> None:
        self.buf.write(text + "\n")

    def json(self, obj) -> None:
        self.buf.write(json.dumps(obj) + "\n")

    def text(self) -> str:
        return self.buf.getvalue()


def _matrix_rows(out: Output, label: str, name: str, A: np.ndarray) -> None:
    for i, row in enumerate(np.asarray(A)):
        for j, z in enumerate(row):
            out.row([label, name, i, j, repr(float(z.real)), repr(float(z.imag))])


def _emit_generators(out: Output, labelled: list[tuple[str, BlockGenerator]]) -> None:
    if out.mode == "json":
        if len(labelled) == 1:
            out.json(generator_to_dict(labelled[0][1]))
        else:
            out.json({label: generator_to_dict(F) for label, F in labelled})
        return
    out.row(["factor", "block", "row", "col", "re", "im"])
    for label, F in labelled:
        out.line(f"# {label}: d_h={F.d_h} d_k={F.d_k}")
        for name, A in zip("KMLC", F.blocks()):
            _matrix_rows(out, label, name, A)


# ---------------------------------------------------------------------------
# commands


def _classify(spec: ExperimentSpec, out: Output) -> int:
    (F,) = _load_all(spec.inputs)
    rep = classify(F, spec.tol)
    fields = [
        ("unitary", rep.is_unitary),
        ("pure_gaussian", rep.is_pure_gaussian),
        ("beta0", rep.beta0),
        ("quasicontractive", rep.is_quasicontractive),
        ("contractive", rep.is_contractive),
        ("isometric", rep.is_isometric),
        ("coisometric", rep.is_coisometric),
        ("gaussian", rep.is_gaussian),
        ("wholly_non_gaussian", rep.is_wholly_non_gaussian),
        ("pure_preservation", rep.is_pure_preservation),
        ("pure_drift", rep.is_pure_drift),
    ]
    if out.mode == "json":
        out.json(asdict(rep))
    else:
        out.line(",".join(f"{k}={_fmt(v)}" for k, v in fields))
    return EXIT_PASS


def _compose(spec: ExperimentSpec, out: Output) -> int:
    gens = _load_all(spec.inputs)
    _emit_generators(out, [("series", series_all(gens))])
    return EXIT_PASS


def _decompose(spec: ExperimentSpec, out: Output) -> int:
    (F,) = _load_all(spec.inputs)
    fn = left_series_decomposition if spec.side == "left" else right_series_decomposition
    F1, F2, F3 = fn(F, spec.tol)
    s = spec.side[0]
    _emit_generators(out, [("F1", F1), (f"F2{s}", F2), (f"F3{s}", F3)])
    return EXIT_PASS


def _gaussian_split(spec: ExperimentSpec, out: Output) -> int:
    (F,) = _load_all(spec.inputs)
    gs = gaussian_split(F, spec.tol)
    if out.mode == "json":
        out.json({
            "F_wng": generator_to_dict(gs.F_wng),
            "F_mg": generator_to_dict(gs.F_mg),
            "basis_pres": encode_matrix(gs.basis_pres),
            "basis_gauss": encode_matrix(gs.basis_gauss),
        })
    else:
        _emit_generators(out, [("F_wng", gs.F_wng), ("F_mg", gs.F_mg)])
        _matrix_rows(out, "basis", "pres", gs.basis_pres)
        _matrix_rows(out, "basis", "gauss", gs.basis_gauss)
    return EXIT_PASS


def _dilate(spec: ExperimentSpec, out: Output) -> int:
    (F,) = _load_all(spec.inputs)
    dil = dilate_to_unitary(F, spec.tol)
    _emit_generators(out, [("F_prime", dil.F_prime)])
    return EXIT_PASS


def _sample(spec: ExperimentSpec, out: Output) -> int:
    F = sample_qc(spec.d_h, spec.d_k, spec.beta, seed=spec.seed)
    if out.mode == "json":
        out.json(generator_to_dict(F))
    else:
        _emit_generators(out, [("sample", F)])
    return EXIT_PASS


def _slope_ok(spec: ExperimentSpec, slope: float) -> bool:
    if spec.expect_slope is None:
        return True
    lo, hi = spec.expect_slope
    return math.isfinite(slope) and lo <= slope <= hi


def _trotter_sweep(spec: ExperimentSpec, out: Output) -> int:
    gens = _load_all(spec.inputs)
    d_k = gens[0].d_k
    if not spec.meshes:
        raise InputError("trotter-sweep needs --meshes")
    gp, g = _step(spec.gprime, d_k, "--gprime"), _step(spec.g, d_k, "--g")
    r, t = spec.window
    try:
        rep = trotter_report(gens, gp, g, r, t, spec.meshes, _schedule(spec.substeps), spec.tol)
    except ValueError as e:
        if isinstance(e, NotQuasicontractiveError):
            raise
        raise InputError(str(e)) from None
    cols = ["mesh", "measured_error", "bound", "ratio", "truncation_estimate", "m_used"]
    if out.mode == "json":
        out.json({
            "rows": [
                {c: float(getattr(row, c)) if c != "m_used" else row.m_used for c in cols}
                | {"inconclusive": row.inconclusive}
                for row in rep.rows
            ],
            "slope": float(rep.slope),
        })
    else:
        out.row(cols)
        for row in rep.rows:
            out.row([_num(row.mesh), _num(row.measured_error), _num(row.bound), _num(row.ratio),
                     _num(row.truncation_estimate), row.m_used])
        out.row(["slope", _num(rep.slope)])
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[rep.verdict(spec.expect_slope)]


def _walk_sweep(spec: ExperimentSpec, out: Output) -> int:
    (F,) = _load_all(spec.inputs)
    gp, g = _step(spec.gprime, F.d_k, "--gprime"), _step(spec.g, F.d_k, "--g")
    r, t = spec.window
    sched = _schedule(spec.substeps)
    ms = auto_schedule(8, 512) if sched == "auto" else sched
    exact = slice_cocycle(F, gp, g, r, t).matrix
    pts = refinement(gp, g, r, t)
    errs = []
    for m in ms:
        V = np.eye(F.d_h, dtype=complex)
        for a, b in zip(pts[:-1], pts[1:]):
            V = V @ walk_cell([F], gp(a), g(a), b - a, m)
        errs.append(op_norm(V - exact))
    slope = -fit_slope(ms, errs)
    if out.mode == "json":
        out.json({"rows": [{"m": m, "error": float(e)} for m, e in zip(ms, errs)], "slope": float(slope)})
    else:
        out.row(["m", "error"])
        for m, e in zip(ms, errs):
            out.row([m, _num(e)])
        out.row(["slope", _num(slope)])
    return EXIT_PASS if _slope_ok(spec, slope) else EXIT_FAIL


def _qform_check(spec: ExperimentSpec, out: Output) -> int:
    rng = np.random.default_rng(spec.seed)
    gens = _load_all(spec.inputs) if spec.inputs else []
    limit = 1e-10
    worst = {"three_factor": 0.0, "wills": 0.0}
    defect_ok = True
    for _ in range(spec.samples):
        if gens:
            forms = [bounded_to_form(F) for F in gens]
            while len(forms) < 3:
                forms.append(forms[-1])
            forms = forms[:3]
        else:
            d_h, d_k = spec.d_h, spec.d_k
            dims = rng.integers(max(d_h - 1, 1), d_h + 1, size=3)
            base = random_form(d_h, d_k, rng, dim=int(dims[0]), scale=0.5)
            forms = [base, random_form(d_h, d_k, rng, frame=base.frame, scale=0.5),
                     random_form(d_h, d_k, rng, dim=int(dims[2]), scale=0.5)]
        Q = intersect_frames(intersect_frames(forms[0].frame, forms[1].frame), forms[2].frame)
        a = rng.standard_normal(Q.shape[1]) + 1j * rng.standard_normal(Q.shape[1])
        z = rng.standard_normal(forms[0].n_noise) + 1j * rng.standard_normal(forms[0].n_noise)
        xi = FormVector(Q @ a, z)
        scale = max(f.scale() for f in forms) ** 3 * (1 + np.linalg.norm(np.r_[xi.u, xi.zeta])) ** 2
        worst["three_factor"] = max(worst["three_factor"], qf_three_factor_residual(*forms, xi, spec.tol) / scale)
        eta = random_vector(forms[0], rng)
        s0 = forms[0].scale() ** 3 * (1 + np.linalg.norm(np.r_[eta.u, eta.zeta])) ** 2
        worst["wills"] = max(worst["wills"], qf_wills_residual(forms[0], eta, spec.tol) / s0)
    for F in gens:
        rep = classify(F, spec.tol)
        if rep.is_contractive and not qf_defect_check(bounded_to_form(F), 0.0, spec.tol):
            defect_ok = False
    rows = [(k, float(v), bool(v <= limit)) for k, v in worst.items()] + [("defect_bridge", 0.0 if defect_ok else 1.0, defect_ok)]
    if out.mode == "json":
        out.json({k: {"value": v, "pass": ok} for k, v, ok in rows})
    else:
        out.row(["check", "relative_residual", "pass"])
        for k, v, ok in rows:
            out.row([k, _num(v), _fmt(ok)])
    return EXIT_PASS if all(ok for _, _, ok in rows) else EXIT_FAIL


HANDLERS = {
    "classify": _classify,
    "compose": _compose,
    "decompose": _decompose,
    "gaussian-split": _gaussian_split,
    "dilate": _dilate,
    "trotter-sweep": _trotter_sweep,
    "walk-sweep": _walk_sweep,
    "qform-check": _qform_check,
    "sample": _sample,
}


def run(spec: ExperimentSpec, stdout=None, stderr=None) -> int:
    """Execute one command; writes results to ``stdout`` and returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    out = Output(spec.out)
    try:
        code = HANDLERS[spec.command](spec, out)
    except (InputError, DimensionError) as e:
        print(f"error: {e}", file=stderr)
        return EXIT_INVALID
    except (NotQuasicontractiveError, NotContractiveError) as e:
        print(f"error: precondition failed: {e}", file=stderr)
        return EXIT_INVALID
    except RecoveryError as e:
        print(f"error: {e}", file=stderr)
        return EXIT_FAIL
    stdout.write(out.text())
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        spec = spec_from_args(ns)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return run(spec)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
