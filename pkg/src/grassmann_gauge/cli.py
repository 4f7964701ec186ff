"""Command-line frontend: form spectra, gauge-field construction and the acceptance suite.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Dict, List, Optional, Sequence

from . import __version__, linalg
from .exterior import b_omega_matrix, exact_spectrum, spectrum
from .forms import (
    g2_forms,
    hyperkaehler_form,
    kaehler_form_sq,
    kostant_form,
    quaternionic_form,
    so_basis,
    spin7_form,
    spin_m_form,
    spin_m_form_even,
    u2_basis,
)
from .gauge import PipelineError, build_half_flat
from .harmonic import build_model
from .parser import ConfigError, ElaborationError, GaugeConfig, ParseError, elaborate_text, generates_nilpotent, load_config
from .poly import DegreeBoundError
from .scalars import Q, format_scalar, is_exact, to_complex
from .spin3 import build_partial

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GROUPS = ("kaehler", "hyperkaehler", "qk", "g2", "spin7", "kostant-so-n", "kostant-u2", "spin-m")

REQUIRED_VERDICTS = {
    "halfflat": ("almost_half_flat", "half_flat", "linC_remainder_zero", "ym_zero"),
    "0partial": ("almost_partially_flat", "cubic_remainder_zero", "zero_partially_flat"),
    "1partial": ("almost_partially_flat", "cubic_remainder_zero", "one_partially_flat", "ym_zero"),
}

_VERDICTS = {"type": "object", "additionalProperties": {"type": ["boolean", "null"]}}
_STRINGS = {"type": "object", "additionalProperties": {"type": "string"}}

SPECTRUM_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "group", "params", "form", "b_matrix", "eigenvalues", "multiplicities",
                 "ratios", "appropriate", "checks", "passed"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "group": {"enum": list(GROUPS)},
        "eigenvalues": {"type": "array", "items": {"type": "string"}},
        "multiplicities": {"type": "array", "items": {"type": "integer"}},
        "ratios": {"type": "array", "items": {"type": "string"}},
        "appropriate": {"type": "boolean"},
        "checks": _VERDICTS,
        "passed": {"type": "boolean"},
    },
}

GAUGE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "prepotential_echo", "mode", "phi", "A_mm", "curvature_components",
                 "verdicts", "required_verdicts", "passed", "truncation_order"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "mode": {"enum": list(REQUIRED_VERDICTS)},
        "phi": {"type": "string"},
        "A_mm": {"type": "string"},
        "C_e_alpha": _STRINGS,
        "C_e_abc": _STRINGS,
        "curvature_components": _STRINGS,
        "verdicts": _VERDICTS,
        "required_verdicts": {"type": "array", "items": {"type": "string"}},
        "passed": {"type": "boolean"},
        "truncation_order": {"type": ["integer", "null"]},
    },
}

VERIFY_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "criteria", "passed"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "passed": {"type": "boolean"},
        "criteria": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["number", "name", "passed", "detail", "seconds"],
                "properties": {
                    "number": {"type": "integer"},
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "detail": {"type": "string"},
                    "seconds": {"type": "number"},
                },
            },
        },
    },
}


class UsageError(Exception):
    pass


# forms spectrum

def _eps_block(p: int) -> List[List[object]]:
    """Standard symplectic form on R^p (p even): blocks [[0, 1], [-1, 0]]."""
    W = linalg.zeros(p, p)
    for k in range(0, p, 2):
        W[k][k + 1], W[k + 1][k] = Q(1), Q(-1)
    return W


def _value_text(v) -> str:
    if is_exact(v):
        return format_scalar(v)
    return f"{float(v):.12g}"


def _ratio(v, lam1):
    if is_exact(v) and is_exact(lam1):
        return v / lam1
    return float(v) / float(lam1)


def build_form(group: str, m: Optional[int], n: Optional[int], p: Optional[int], pair: Sequence[int]):
    """(form, expected multiplicities or None, lambda_1 multiplicity or None) for a named group."""
    if group == "kaehler":
        m = 2 if m is None else m
        if m < 2:
            raise UsageError("kaehler needs --m >= 2")
        return kaehler_form_sq(m), None, None
    if group == "hyperkaehler":
        m = 1 if m is None else m
        if m < 1:
            raise UsageError("hyperkaehler needs --m >= 1")
        return hyperkaehler_form(m, *pair), None, None
    if group == "qk":
        m = 1 if m is None else m
        if m < 1:
            raise UsageError("qk needs --m >= 1")
        mid = 3 * (m * (2 * m - 1) - 1)
        dims = sorted(d for d in (m * (2 * m + 1), mid, 3) if d)
        return quaternionic_form(m), dims, m * (2 * m + 1)
    if group == "g2":
        return g2_forms()[1], [7, 14], None
    if group == "spin7":
        return spin7_form(), [7, 21], None
    if group == "kostant-so-n":
        n = 4 if n is None else n
        if n < 2:
            raise UsageError("kostant-so-n needs --n >= 2")
        return kostant_form(so_basis(n)), None, None
    if group == "kostant-u2":
        return kostant_form(u2_basis()), None, None
    if group == "spin-m":
        m = 1 if m is None else m
        if m < 1:
            raise UsageError("spin-m needs --m >= 1")
        if m % 2:
            p = 2 if p is None else p
            if p < 2 or p % 2:
                raise UsageError("odd m needs an even --p >= 2")
            return spin_m_form(m, _eps_block(p)), None, None
        p = 2 if p is None else p
        if p < 1:
            raise UsageError("even m needs --p >= 1")
        return spin_m_form_even(m, linalg.identity(p)), None, None
    raise UsageError(f"unknown group {group!r}")


def spectrum_report(group: str, m: Optional[int] = None, n: Optional[int] = None, p: Optional[int] = None,
                    pair: Sequence[int] = (1, 1), exact: bool = False, tol: float = 1e-9) -> Dict[str, object]:
    if tol <= 0:
        raise UsageError("--tol must be positive")
    Omega, expect_dims, lam1_mult = build_form(group, m, n, p, pair)
    B = b_omega_matrix(Omega)
    real_metric = all(is_exact(x) and to_complex(x).imag == 0 for row in Omega.space.gram for x in row)
    use_exact = exact or not real_metric
    spec = exact_spectrum(B) if use_exact else spectrum(B, rtol=tol)
    scale_ = max([abs(float(e.value)) for e in spec] + [1.0])
    for e in spec:
        if not e.exact and abs(float(e.value)) <= tol * scale_:
            e.value = 0.0
    spec = sorted(spec, key=lambda e: -float(to_complex(e.value).real))
    lam1 = None
    if lam1_mult is not None:
        lam1 = max((e.value for e in spec if e.multiplicity == lam1_mult), default=None, key=float)
    if lam1 is None:
        lam1 = next((e.value for e in spec if float(e.value) != 0), None)
    ratios = []
    if lam1 is not None:
        first = [e for e in spec if e.value == lam1]
        rest = sorted((e for e in spec if e.value != lam1), key=lambda e: -float(_ratio(e.value, lam1)))
        spec = first + rest
        ratios = [_ratio(e.value, lam1) for e in spec]
    nonzero = [e for e in spec if abs(float(e.value)) > tol]
    checks: Dict[str, Optional[bool]] = {}
    mults = [e.multiplicity for e in spec]
    if expect_dims is not None:
        checks["multiplicities"] = sorted(mults) == sorted(expect_dims)
    if group == "qk" and m in (1, 2) and ratios:
        want = {1: [1.0, -1.0], 2: [1.0, -1 / 3, -5 / 3]}[m]
        checks["ratios"] = len(ratios) == len(want) and all(abs(float(a) - b) <= tol for a, b in zip(ratios, want))
    if group == "kostant-so-n" and n in (4, 5):
        checks["zero_form"] = Omega.is_zero()
    if group == "kostant-u2":
        checks["nonzero_form"] = not Omega.is_zero()
    trace = sum((B[i][i] for i in range(len(B))), Q(0))
    return {
        "schema_version": SCHEMA_VERSION,
        "group": group,
        "params": {"m": m, "n": n, "p": p, "pair": list(pair) if group == "hyperkaehler" else None},
        "form": {
            "dimension": Omega.space.dim,
            "terms": len(Omega.coeffs),
            "coefficients": {",".join(map(str, k)): _value_text(c) for k, c in sorted(Omega.coeffs.items())},
        },
        "b_matrix": {"size": len(B), "trace": _value_text(trace), "nonzero_entries": sum(1 for r in B for x in r if x != 0)},
        "exact": use_exact,
        "eigenvalues": [_value_text(e.value) for e in spec],
        "multiplicities": mults,
        "ratios": [_value_text(r) for r in ratios],
        "appropriate": bool(nonzero),
        "checks": checks,
        "passed": all(checks.values()),
    }


def _print_spectrum(rep: Dict[str, object]) -> None:
    params = ", ".join(f"{k}={v}" for k, v in rep["params"].items() if v is not None)
    print(f"group {rep['group']}" + (f" ({params})" if params else ""))
    print(f"form: {rep['form']['terms']} nonzero coefficients on R^{rep['form']['dimension']}")
    bm = rep["b_matrix"]
    print(f"B_Omega: {bm['size']}x{bm['size']}, trace {bm['trace']}, {bm['nonzero_entries']} nonzero entries")
    for i, (v, k) in enumerate(zip(rep["eigenvalues"], rep["multiplicities"])):
        ratio = f"  ratio {rep['ratios'][i]}" if rep["ratios"] else ""
        print(f"  eigenvalue {v}  multiplicity {k}{ratio}")
    print(f"appropriate: {str(rep['appropriate']).lower()}")
    for name, ok in rep["checks"].items():
        print(f"check {name}: {'pass' if ok else 'FAIL'}")


def cmd_forms_spectrum(args) -> int:
    try:
        rep = spectrum_report(args.group, args.m, args.n, args.p, args.pair, args.exact, args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        print(json.dumps(rep, indent=2))
    else:
        _print_spectrum(rep)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


# gauge build

def _components(F, model) -> Dict[str, str]:
    out = {}
    order = model.frame_order
    for a, i in enumerate(order):
        for j in order[a + 1:]:
            M = F[(i, j)]
            if not M.is_zero():
                out[f"F({_frame_name(i)}, {_frame_name(j)})"] = M.to_text()
    return out


def _frame_name(key) -> str:
    e, A = key
    return f"X^{e}_{''.join(map(str, A))}"


def run_gauge_build(cfg: GaugeConfig, mode: Optional[str] = None, series_order: Optional[int] = None) -> Dict[str, object]:
    """Run the pipeline for a config; raises UsageError for rejected input."""
    mode = mode or cfg.mode
    allowed = {1: ("halfflat",), 3: ("0partial", "1partial")}[cfg.spin]
    if mode not in allowed:
        raise UsageError(f"mode {mode!r} is not available for spin {cfg.spin} (use {', '.join(allowed)})")
    order = series_order if series_order is not None else cfg.series_order
    if order is None and not generates_nilpotent(cfg.matrices, cfg.gauge_rank):
        raise UsageError("non-nilpotent generators in exact mode; set series_order for a truncated series")
    model = build_model(cfg.spin, cfg.rank_E, cfg.gauge_rank, series_order=order, verify=False)
    text = cfg.prepotential if order is None else f"t*({cfg.prepotential})"
    A = elaborate_text(text, model, cfg.matrices)
    omega = cfg.omega_E
    if omega is None and cfg.rank_E % 2 == 0:
        omega = _eps_block(cfg.rank_E)
    if cfg.spin == 1:
        res = build_half_flat(A, model, omega_E=omega)
        coeffs_key = "C_e_alpha"
        A_mm = res.potentials.A_mm
        F = res.curvature.components
    else:
        res = build_partial(A, model, mode, omega_E=omega)
        coeffs_key = "C_e_abc"
        A_mm = res.A["d--"]
        F = res.curvature.components
    conn = res.connection
    coeffs = {}
    for key in model.frame_order:
        e, Aidx = key
        coeffs[f"C^{e}_{''.join(map(str, Aidx))}"] = conn.potential(key).to_text()
    verdicts = dict(res.verdicts)
    required = [k for k in REQUIRED_VERDICTS[mode] if not (k == "ym_zero" and verdicts.get(k) is None)]
    report = {
        "schema_version": SCHEMA_VERSION,
        "prepotential_echo": cfg.echo(),
        "mode": mode,
        "phi": res.phi.Phi.to_text(),
        "phi_iterations": res.phi.iterations,
        "A_mm": A_mm.to_text(),
        coeffs_key: coeffs,
        "curvature_components": _components(F, model),
        "ym_residual_terms": None if res.ym is None else len(res.ym),
        "verdicts": verdicts,
        "required_verdicts": required,
        "passed": all(verdicts[k] is True for k in required),
        "truncation_order": order,
        "notes": list(res.notes),
    }
    return report


def _print_gauge(rep: Dict[str, object]) -> None:
    print(f"mode {rep['mode']}; prepotential {rep['prepotential_echo']['prepotential']}")
    if rep["truncation_order"] is not None:
        print(f"series mode, truncated at t^{rep['truncation_order']}")
    print(f"Phi = {rep['phi']}")
    print(f"A-- = {rep['A_mm']}")
    for key in ("C_e_alpha", "C_e_abc"):
        for name, text in rep.get(key, {}).items():
            print(f"{name} = {text}")
    for name, text in rep["curvature_components"].items():
        print(f"{name} = {text}")
    for name, v in rep["verdicts"].items():
        mark = "" if name in rep["required_verdicts"] else " (informational)"
        print(f"verdict {name}: {json.dumps(v)}{mark}")
    print("PASS" if rep["passed"] else "FAIL")


def cmd_gauge_build(args) -> int:
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    try:
        rep = run_gauge_build(cfg, args.mode, args.series_order)
    except (ParseError, ElaborationError) as exc:
        raise UsageError(f"prepotential: {exc}") from None
    except PipelineError as exc:
        raise UsageError(str(exc)) from None
    except DegreeBoundError as exc:
        raise UsageError(f"{exc}; raise GG_MAX_DEGREE to allow larger polynomials") from None
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(rep, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
    if args.format == "json":
        print(json.dumps(rep, indent=2, ensure_ascii=False))
    else:
        _print_gauge(rep)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


# verify all

def cmd_verify_all(args) -> int:
    from .verify import CRITERIA, run_all

    numbers = None
    if args.criteria:
        try:
            numbers = [int(x) for x in args.criteria.split(",")]
        except ValueError:
            raise UsageError("--criteria takes a comma-separated list of numbers") from None
        bad = [k for k in numbers if not 1 <= k <= len(CRITERIA)]
        if bad:
            raise UsageError(f"no such criterion: {bad[0]}")
    results = run_all(numbers)
    passed = all(r.passed for r in results)
    if args.format == "json":
        print(json.dumps({
            "schema_version": SCHEMA_VERSION,
            "criteria": [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
                          "seconds": round(r.seconds, 3)} for r in results],
            "passed": passed,
        }, indent=2, ensure_ascii=False))
    else:
        for r in results:
            print(r.line())
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if passed else EXIT_FAIL


def _pair(text: str):
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected a,b with a, b in {1, 2, 3}") from None
    return a, b


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grassmann-gauge", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    forms = sub.add_parser("forms", help="invariant 4-forms").add_subparsers(dest="action", required=True)
    sp = forms.add_parser("spectrum", help="spectrum of B_Omega for a named 4-form")
    sp.add_argument("--group", required=True, choices=GROUPS)
    sp.add_argument("--m", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=int, help="rank of E for spin-m forms")
    sp.add_argument("--pair", type=_pair, default=(1, 1), help="a,b for omega_a ^ omega_b (hyperkaehler)")
    sp.add_argument("--exact", action="store_true", help="exact rational eigenvalues")
    sp.add_argument("--tol", type=float, default=1e-9, help="relative tolerance for clustering eigenvalues")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_forms_spectrum)

    gauge = sub.add_parser("gauge", help="gauge fields from a prepotential").add_subparsers(dest="action", required=True)
    gb = gauge.add_parser("build", help="run the construction pipeline")
    gb.add_argument("--config", required=True)
    gb.add_argument("--mode", choices=tuple(REQUIRED_VERDICTS))
    gb.add_argument("--series-order", type=int, help="truncate the Phi series at this order in t")
    gb.add_argument("--output", help="write the JSON report here")
    gb.add_argument("--format", choices=("text", "json"), default="text")
    gb.set_defaults(func=cmd_gauge_build)

    ver = sub.add_parser("verify", help="acceptance checks").add_subparsers(dest="action", required=True)
    va = ver.add_parser("all", help="run every acceptance criterion")
    va.add_argument("--criteria", help="comma-separated subset, e.g. 1,2,8")
    va.add_argument("--format", choices=("text", "json"), default="text")
    va.set_defaults(func=cmd_verify_all)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    if getattr(args, "series_order", None) is not None and args.series_order < 0:
        print("error: --series-order must be nonnegative", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
