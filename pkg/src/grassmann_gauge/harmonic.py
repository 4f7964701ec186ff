"""Flat-background harmonic space: coordinates, vertical and horizontal vector fields, analytic coordinates.

Conventions: eps_12 = +1; lowered harmonics u^(+-)_alpha = eps_(alpha beta) u_(+-)^beta,
so u^+_1 = u_+^2 and u^+_2 = -u_+^1. For spin 3/2 the base coordinates are
x[a,A] with A a sorted triple over {1,2}, and d/dx[a,A] carries no
multiplicity factor; the X-fields sum over ordered triples instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from .poly import U_NAMES, Derivation, Poly, PolyMatrix, VarTable
from .scalars import Q

SPIN3_COORDS = ("ppp", "ppm", "pmm", "mmm")
# Charge of each named spin-3/2 X-field.
SPIN3_FIELDS = {"X+++": 3, "X+": 1, "X-": -1, "X---": -3}
SPIN1_FIELDS = {"X+": 1, "X-": -1}


def multi_indices(m: int) -> List[Tuple[int, ...]]:
    """Sorted 1-based multi-indices of length m over {1, 2}, ordered by the number of 2s."""
    return [tuple([1] * (m - k) + [2] * k) for k in range(m + 1)]


def multiplicity(A: Sequence[int]) -> int:
    """Number of distinct orderings of A."""
    k = sum(1 for a in A if a == 2)
    return factorial(len(A)) // (factorial(k) * factorial(len(A) - k))


def x_name(a: int, A: Sequence[int]) -> str:
    return f"x[{a},{''.join(str(i) for i in A)}]"


@dataclass(eq=False)
class HarmonicModel:
    spin_m: int
    rank_E: int
    gauge_rank: int
    vt: VarTable
    d0: Derivation
    dpp: Derivation
    dmm: Derivation
    # fields[name][e-1]: the horizontal field family, e.g. fields["X+"][0] = X^1_+.
    fields: Dict[str, List[Derivation]]
    # frame[(e, A)]: the coordinate field dual to x[e,A]; A a sorted tuple (length 1 or 3).
    frame: Dict[Tuple[int, Tuple[int, ...]], Derivation]
    series_order: Optional[int] = None
    _coord_cache: dict = field(default_factory=dict, repr=False)

    @property
    def multi_indices(self) -> List[Tuple[int, ...]]:
        return multi_indices(self.spin_m) if self.spin_m == 3 else [(1,), (2,)]

    @property
    def frame_order(self) -> List[Tuple[int, Tuple[int, ...]]]:
        """Frame basis ordered (X^1_A..., X^2_A...), matching the base-coordinate order."""
        return [(e, A) for e in range(1, self.rank_E + 1) for A in self.multi_indices]

    def u(self, sign: str, alpha: int) -> Poly:
        return Poly.var(self.vt, f"u[{sign},{alpha}]")

    def u_lower(self, sign: str, alpha: int) -> Poly:
        """u^(sign)_alpha = eps_(alpha beta) u_(sign)^beta."""
        return self.u(sign, 2) if alpha == 1 else -self.u(sign, 1)

    def x(self, a: int, A) -> Poly:
        if isinstance(A, int):
            A = (A,)
        return Poly.var(self.vt, x_name(a, tuple(sorted(A))))

    def coordinate(self, kind: str, a: int) -> Poly:
        """Named analytic coordinate: xplus/xminus (spin 1/2) or xppp/xppm/xpmm/xmmm (spin 3/2)."""
        key = (kind, a)
        if key in self._coord_cache:
            return self._coord_cache[key]
        if not 1 <= a <= self.rank_E:
            raise KeyError(f"{kind}[{a}]: index out of range 1..{self.rank_E}")
        if self.spin_m == 1:
            signs = {"xplus": "+", "xminus": "-"}
            if kind not in signs:
                raise KeyError(f"{kind} is not a spin-1/2 analytic coordinate (use xplus/xminus)")
            s = signs[kind]
            out = self.x(a, 1) * self.u_lower(s, 1) + self.x(a, 2) * self.u_lower(s, 2)
        else:
            if kind[:1] != "x" or kind[1:] not in SPIN3_COORDS:
                raise KeyError(f"{kind} is not a spin-3/2 analytic coordinate (use xppp/xppm/xpmm/xmmm)")
            slots = ["+" if ch == "p" else "-" for ch in kind[1:]]
            out = Poly.zero(self.vt)
            for A in multi_indices(3):
                sym = Poly.zero(self.vt)
                for perm in set(permutations(A)):
                    term = Poly.const(self.vt, 1)
                    for s, alpha in zip(slots, perm):
                        term = term * self.u_lower(s, alpha)
                    sym = sym + term
                # Sum over distinct orderings divided by their number: the symmetrized contraction.
                out = out + self.x(a, A) * sym.scale(Q(1, multiplicity(A)))
        self._coord_cache[key] = out
        return out

    def field(self, name: str, e: int) -> Derivation:
        return self.fields[name][e - 1]

    def named_operators(self) -> Dict[str, Derivation]:
        ops = {"d0": self.d0, "d++": self.dpp, "d--": self.dmm}
        for name, fam in self.fields.items():
            for e, D in enumerate(fam, start=1):
                ops[f"{name}[{e}]"] = D
        return ops

    def charge_of_field(self, name: str) -> int:
        return (SPIN1_FIELDS if self.spin_m == 1 else SPIN3_FIELDS)[name]

    def bracket_table(self) -> Dict[Tuple[str, str], List[Tuple[object, str]]]:
        """Structure constants [P, Q] = sum c * R among the named operators (flat background)."""
        return self._brackets

    def expected_brackets(self) -> Dict[Tuple[str, str], List[Tuple[object, str]]]:
        ops = list(self.named_operators())
        table: Dict[Tuple[str, str], List[Tuple[object, str]]] = {(a, b): [] for a in ops for b in ops}

        def put(a, b, terms):
            table[(a, b)] = terms
            table[(b, a)] = [(-c, n) for c, n in terms]

        put("d++", "d--", [(Q(1), "d0")])
        put("d0", "d++", [(Q(2), "d++")])
        put("d0", "d--", [(Q(-2), "d--")])
        p = self.rank_E
        if self.spin_m == 1:
            for e in range(1, p + 1):
                put("d0", f"X+[{e}]", [(Q(1), f"X+[{e}]")])
                put("d0", f"X-[{e}]", [(Q(-1), f"X-[{e}]")])
                put("d++", f"X-[{e}]", [(Q(1), f"X+[{e}]")])
                put("d--", f"X+[{e}]", [(Q(1), f"X-[{e}]")])
        else:
            for e in range(1, p + 1):
                for name, k in SPIN3_FIELDS.items():
                    put("d0", f"{name}[{e}]", [(Q(k), f"{name}[{e}]")])
                put("d++", f"X-[{e}]", [(Q(2), f"X+[{e}]")])
                put("d++", f"X+[{e}]", [(Q(1), f"X+++[{e}]")])
                put("d++", f"X---[{e}]", [(Q(3), f"X-[{e}]")])
                put("d--", f"X+++[{e}]", [(Q(3), f"X+[{e}]")])
                put("d--", f"X+[{e}]", [(Q(2), f"X-[{e}]")])
                put("d--", f"X-[{e}]", [(Q(1), f"X---[{e}]")])
        return table

    def combination(self, terms: List[Tuple[object, str]]) -> Derivation:
        ops = self.named_operators()
        out = Derivation(self.vt, {}, check=False)
        for c, n in terms:
            out = out + ops[n].scale(c)
        return out

    def verify_brackets(self) -> List[str]:
        """Operator-level check of every expected bracket; returns the failing pairs."""
        ops = self.named_operators()
        failures = []
        for (a, b), terms in self.expected_brackets().items():
            if a >= b:
                continue
            if not ops[a].bracket(ops[b]) == self.combination(terms):
                failures.append(f"[{a}, {b}]")
        return failures


def _build_vertical(vt: VarTable):
    up = [Poly.var(vt, U_NAMES[0]), Poly.var(vt, U_NAMES[1])]
    um = [Poly.var(vt, U_NAMES[2]), Poly.var(vt, U_NAMES[3])]
    d0 = Derivation(vt, {U_NAMES[0]: up[0], U_NAMES[1]: up[1], U_NAMES[2]: -um[0], U_NAMES[3]: -um[1]}, "d0")
    dpp = Derivation(vt, {U_NAMES[2]: up[0], U_NAMES[3]: up[1]}, "d++")
    dmm = Derivation(vt, {U_NAMES[0]: um[0], U_NAMES[1]: um[1]}, "d--")
    return d0, dpp, dmm


def build_model(spin_m: int, rank_E: int, gauge_rank: int = 1, series_order: Optional[int] = None,
                max_degree: Optional[int] = None, verify: bool = True) -> HarmonicModel:
    """Build the flat model; with ``series_order`` a formal parameter t truncated at that order is added."""
    if spin_m not in (1, 3):
        raise ValueError(f"unsupported spin: m = {spin_m} (expected 1 or 3)")
    if rank_E < 1 or gauge_rank < 1:
        raise ValueError("rank_E and gauge_rank must be >= 1")
    idx = [(1,), (2,)] if spin_m == 1 else multi_indices(3)
    names = [x_name(a, A) for a in range(1, rank_E + 1) for A in idx]
    params = {"t": series_order} if series_order is not None else {}
    vt = VarTable(names, params, max_degree)
    d0, dpp, dmm = _build_vertical(vt)
    up = {1: Poly.var(vt, "u[+,1]"), 2: Poly.var(vt, "u[+,2]")}
    um = {1: Poly.var(vt, "u[-,1]"), 2: Poly.var(vt, "u[-,2]")}
    frame = {}
    for a in range(1, rank_E + 1):
        for A in idx:
            frame[(a, A)] = Derivation(vt, {x_name(a, A): Poly.const(vt, 1)}, f"d/d{x_name(a, A)}", check=False)
    fields: Dict[str, List[Derivation]] = {}
    if spin_m == 1:
        for name, us in (("X+", up), ("X-", um)):
            fields[name] = [
                Derivation(vt, {x_name(e, (al,)): us[al] for al in (1, 2)}, f"{name}[{e}]")
                for e in range(1, rank_E + 1)
            ]
    else:
        # Number of u_- factors in each ordered triple.
        for name, n_minus in (("X+++", 0), ("X+", 1), ("X-", 2), ("X---", 3)):
            fam = []
            for e in range(1, rank_E + 1):
                coeffs: Dict[str, Poly] = {}
                for triple in product((1, 2), repeat=3):
                    term = Poly.const(vt, 1)
                    for slot, al in enumerate(triple):
                        term = term * (um[al] if slot < n_minus else up[al])
                    key = x_name(e, tuple(sorted(triple)))
                    coeffs[key] = coeffs[key] + term if key in coeffs else term
                fam.append(Derivation(vt, coeffs, f"{name}[{e}]"))
            fields[name] = fam
    model = HarmonicModel(spin_m, rank_E, gauge_rank, vt, d0, dpp, dmm, fields, frame, series_order)
    model._brackets = model.expected_brackets()
    if verify:
        bad = model.verify_brackets()
        if bad:
            raise AssertionError(f"harmonic model commutator self-test failed: {', '.join(bad)}")
        _verify_coordinates(model)
    return model


def _verify_coordinates(model: HarmonicModel) -> None:
    """The analytic coordinates must be annihilated by the fields defining their ring."""
    p = model.rank_E
    one = Poly.const(model.vt, 1)
    for e in range(1, p + 1):
        for a in range(1, p + 1):
            delta = one if a == e else Poly.zero(model.vt)
            if model.spin_m == 1:
                Xp = model.field("X+", e)
                if not Xp(model.coordinate("xplus", a)).is_zero():
                    raise AssertionError("X+ xplus != 0")
                if not Xp(model.coordinate("xminus", a)) == delta:
                    raise AssertionError("X+ xminus != delta")
            else:
                X3, X1 = model.field("X+++", e), model.field("X+", e)
                for kind in ("xppp", "xppm", "xpmm"):
                    if not X3(model.coordinate(kind, a)).is_zero():
                        raise AssertionError(f"X+++ {kind} != 0")
                for kind in ("xppp", "xppm"):
                    if not X1(model.coordinate(kind, a)).is_zero():
                        raise AssertionError(f"X+ {kind} != 0")


# Annihilating fields and the allowed named coordinates per analytic mode.
MODES = {
    "halfflat": (1, ("X+",)),
    "0partial": (3, ("X+++",)),
    "1partial": (3, ("X+++", "X+")),
}


@dataclass
class AnalyticReport:
    ok: bool
    residuals: Dict[str, PolyMatrix]

    def failed(self) -> List[str]:
        return [k for k, v in self.residuals.items() if not v.is_zero()]


def analytic_check(f, model: HarmonicModel, mode: str, charge: int) -> AnalyticReport:
    """Exact check that f is annihilated by the mode's fields and has the given charge."""
    if mode not in MODES:
        raise ValueError(f"unknown analytic mode {mode!r}; expected one of {sorted(MODES)}")
    spin, names = MODES[mode]
    if spin != model.spin_m:
        raise ValueError(f"mode {mode} needs spin m = {spin}, model has m = {model.spin_m}")
    if isinstance(f, Poly):
        f = PolyMatrix(model.vt, [[f]])
    residuals: Dict[str, PolyMatrix] = {}
    residuals["charge"] = model.d0.apply(f) - f.scale(charge)
    for name in names:
        for e in range(1, model.rank_E + 1):
            residuals[f"{name}[{e}]"] = model.field(name, e).apply(f)
    ok = all(r.is_zero() for r in residuals.values())
    return AnalyticReport(ok, residuals)


def spanning_monomials(model: HarmonicModel, max_degree: int, limit_x: int = 2) -> List[Poly]:
    """Reduced monomials in u and the first ``limit_x`` base coordinates up to total degree max_degree."""
    names = list(U_NAMES) + list(model.vt.names[4:4 + min(limit_x, model.vt.n_x)])
    out = []

    def rec(i, remaining, exps):
        if i == len(names):
            out.append(exps[:])
            return
        for e in range(remaining + 1):
            exps.append(e)
            rec(i + 1, remaining - e, exps)
            exps.pop()

    rec(0, max_degree, [])
    polys = []
    for exps in out:
        if exps[0] and exps[3]:
            continue  # not reduced: contains u_+^1 u_-^2
        key = 0
        for n, e in zip(names, exps):
            key += model.vt.key(n, e)
        polys.append(Poly(model.vt, {key: Q(1)}, reduced=True))
    return polys


def verify_on_monomials(model: HarmonicModel, max_degree: int = 6, limit_x: int = 2) -> List[str]:
    """Check every expected bracket by applying both sides to a monomial spanning set."""
    ops = model.named_operators()
    monos = spanning_monomials(model, max_degree, limit_x)
    failures = []
    for (a, b), terms in model.expected_brackets().items():
        if a >= b:
            continue
        rhs = model.combination(terms)
        A, B = ops[a], ops[b]
        for mono in monos:
            if not A(B(mono)) - B(A(mono)) == rhs(mono):
                failures.append(f"[{a}, {b}] on {mono.to_text()}")
                break
    return failures
