"""Exact polynomials on the harmonic space, modulo u_+^1 u_-^2 - u_+^2 u_-^1 = 1.

Variables are laid out with the four harmonic variables first
(u_+^1, u_+^2, u_-^1, u_-^2), then the base coordinates, then optional
formal parameters. Each variable owns an 8-bit exponent field of a packed
integer key. A formal parameter may carry a truncation order, in which case
the ring is additionally quotiented by t^(order+1).
"""

from __future__ import annotations

import os
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import kernels, linalg
from .scalars import Q, as_scalar, format_scalar

WIDTH = 8
MASK = (1 << WIDTH) - 1
U_NAMES = ("u[+,1]", "u[+,2]", "u[-,1]", "u[-,2]")
UP1, UP2, UM1, UM2 = 0, 1, 2, 3
S_P1, S_P2, S_M1, S_M2 = 0, WIDTH, 2 * WIDTH, 3 * WIDTH
U_MASK = (1 << (4 * WIDTH)) - 1
DEFAULT_MAX_DEGREE = 16


class DegreeBoundError(ArithmeticError):
    pass


class InconsistentSystem(ArithmeticError):
    pass


def _env_max_degree() -> int:
    raw = os.environ.get("GG_MAX_DEGREE")
    return int(raw) if raw else DEFAULT_MAX_DEGREE


class VarTable:
    """Variable names and layout; ``params`` maps formal-parameter names to truncation orders (or None)."""

    def __init__(self, x_names: Sequence[str], params: Optional[Dict[str, Optional[int]]] = None,
                 max_degree: Optional[int] = None):
        params = dict(params or {})
        names = list(U_NAMES) + list(x_names) + list(params)
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        self.names: Tuple[str, ...] = tuple(names)
        self.index = {n: i for i, n in enumerate(names)}
        self.n_x = len(x_names)
        self.params = params
        self.max_degree = _env_max_degree() if max_degree is None else max_degree
        n_core = 4 + self.n_x
        self.core_mask = (1 << (n_core * WIDTH)) - 1
        self.truncations = [
            (self.index[name] * WIDTH, order) for name, order in params.items() if order is not None
        ]

    def __eq__(self, other):
        return isinstance(other, VarTable) and self.names == other.names and self.params == other.params

    def __hash__(self):
        return hash((self.names, tuple(self.params.items())))

    def __repr__(self):
        return f"VarTable({list(self.names)})"

    def key(self, name: str, power: int = 1) -> int:
        return power << (self.index[name] * WIDTH)

    def shift(self, name_or_index) -> int:
        i = self.index[name_or_index] if isinstance(name_or_index, str) else name_or_index
        return i * WIDTH

    def exponents(self, key: int) -> Tuple[int, ...]:
        return tuple((key >> (i * WIDTH)) & MASK for i in range(len(self.names)))

    def from_exponents(self, exps: Sequence[int]) -> int:
        k = 0
        for i, e in enumerate(exps):
            if e > MASK:
                raise DegreeBoundError("exponent exceeds field width")
            k |= e << (i * WIDTH)
        return k

    def with_params(self, params: Dict[str, Optional[int]]) -> "VarTable":
        return VarTable(self.names[4:4 + self.n_x], params, self.max_degree)


def _truncate(vt: VarTable, terms: dict) -> dict:
    for shift, order in vt.truncations:
        terms = {k: c for k, c in terms.items() if ((k >> shift) & MASK) <= order}
    return terms


def _reduce(terms: dict) -> dict:
    return kernels.reduce_det(terms, S_P1, S_M2, S_P2, S_M1, MASK)


def _check_degree(vt: VarTable, terms: dict) -> dict:
    if terms:
        core = {k & vt.core_mask: None for k in terms}
        d = kernels.max_degree(core, len(vt.names), WIDTH, MASK)
        if d > vt.max_degree:
            raise DegreeBoundError(f"polynomial degree {d} exceeds bound {vt.max_degree} (set GG_MAX_DEGREE)")
    return terms


def charge_of(key: int) -> int:
    return ((key >> S_P1) & MASK) + ((key >> S_P2) & MASK) - ((key >> S_M1) & MASK) - ((key >> S_M2) & MASK)


def u_degree(key: int) -> int:
    return sum((key >> s) & MASK for s in (S_P1, S_P2, S_M1, S_M2))


class Poly:
    """A reduced polynomial; ``terms`` maps packed monomials to nonzero exact coefficients."""

    __slots__ = ("vt", "terms")

    def __init__(self, vt: VarTable, terms: Optional[dict] = None, reduced: bool = False):
        terms = {k: c for k, c in (terms or {}).items() if c != 0}
        if not reduced:
            terms = _truncate(vt, _reduce(terms))
        self.vt = vt
        self.terms = terms

    @staticmethod
    def const(vt: VarTable, c) -> "Poly":
        c = as_scalar(c)
        return Poly(vt, {0: c} if c != 0 else {}, reduced=True)

    @staticmethod
    def var(vt: VarTable, name: str) -> "Poly":
        return Poly(vt, {vt.key(name): Q(1)})

    @staticmethod
    def zero(vt: VarTable) -> "Poly":
        return Poly(vt, {}, reduced=True)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.vt is not self.vt and other.vt != self.vt:
                raise ValueError("polynomials over different variable tables")
            return other
        return Poly.const(self.vt, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        return Poly(self.vt, kernels.add_scaled(dict(self.terms), other.terms, Q(1)), reduced=True)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.vt, {k: -c for k, c in self.terms.items()}, reduced=True)

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        return Poly(self.vt, kernels.add_scaled(dict(self.terms), other.terms, Q(-1)), reduced=True)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = as_scalar(c)
        if c == 0:
            return Poly.zero(self.vt)
        return Poly(self.vt, {k: c * v for k, v in self.terms.items()}, reduced=True)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        other = self._coerce(other)
        if not self.terms or not other.terms:
            return Poly.zero(self.vt)
        raw = kernels.mul(self.terms, other.terms)
        raw = _truncate(self.vt, raw)
        _check_degree(self.vt, raw)
        return Poly(self.vt, _truncate(self.vt, _reduce(raw)), reduced=True)

    def __rmul__(self, other) -> "Poly":
        return self.scale(other)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power")
        out = Poly.const(self.vt, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.terms == other.terms
        return self.terms == Poly.const(self.vt, other).terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"Poly({self.to_text()})"

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or set(self.terms) == {0}

    def constant_term(self):
        return self.terms.get(0, Q(0))

    def degree(self) -> int:
        if not self.terms:
            return -1
        return kernels.max_degree({k & self.vt.core_mask: None for k in self.terms}, len(self.vt.names), WIDTH, MASK)

    def max_u_degree(self) -> int:
        return max((u_degree(k) for k in self.terms), default=-1)

    def charges(self) -> set:
        return {charge_of(k) for k in self.terms}

    def diff(self, name_or_index) -> "Poly":
        """Partial derivative of the reduced representative (valid for x-variables and parameters)."""
        shift = self.vt.shift(name_or_index)
        if shift < 4 * WIDTH:
            raise ValueError("use a Derivation for derivatives in the harmonic variables")
        return Poly(self.vt, kernels.derive(self.terms, shift, MASK), reduced=True)

    def split_u(self) -> Dict[int, "Poly"]:
        """Map from u-monomial key to its coefficient polynomial in the remaining variables."""
        out: Dict[int, dict] = {}
        for k, c in self.terms.items():
            out.setdefault(k & U_MASK, {})[k & ~U_MASK] = c
        return {uk: Poly(self.vt, t, reduced=True) for uk, t in out.items()}

    def depends_on_u(self) -> bool:
        return any(k & U_MASK for k in self.terms)

    def param_coefficient(self, name: str, power: int) -> "Poly":
        shift = self.vt.shift(name)
        out = {k - (power << shift): c for k, c in self.terms.items() if ((k >> shift) & MASK) == power}
        return Poly(self.vt, out, reduced=True)

    def substitute_param(self, name: str, value) -> "Poly":
        shift = self.vt.shift(name)
        out: dict = {}
        value = as_scalar(value)
        for k, c in self.terms.items():
            e = (k >> shift) & MASK
            kk = k - (e << shift)
            out[kk] = out.get(kk, Q(0)) + c * value ** e
        return Poly(self.vt, out, reduced=True)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        vt = self.vt
        keys = sorted(self.terms, key=lambda k: (-sum(vt.exponents(k)), tuple(-e for e in vt.exponents(k))))
        parts = []
        for k in keys:
            c = self.terms[k]
            mono = []
            for name, e in zip(vt.names, vt.exponents(k)):
                if e == 1:
                    mono.append(name)
                elif e > 1:
                    mono.append(f"{name}^{e}")
            ctext = format_scalar(c)
            negative = not ctext.startswith("(") and ctext.startswith("-")
            if negative:
                ctext = ctext[1:]
            if mono:
                body = "*".join(mono) if ctext == "1" else ctext + "*" + "*".join(mono)
            else:
                body = ctext
            parts.append(("-" if negative else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    __str__ = to_text


class Derivation:
    """A first-order operator sum_v c_v d/dv on the reduced ring, tangent to det = 1."""

    __slots__ = ("vt", "coeffs", "name")

    def __init__(self, vt: VarTable, coeffs: Dict[object, Poly], name: str = "", check: bool = True):
        clean = {}
        for var, c in coeffs.items():
            i = vt.index[var] if isinstance(var, str) else var
            if not 0 <= i < len(vt.names):
                raise KeyError(f"unknown variable {var}")
            if not c.is_zero():
                clean[i] = c
        self.vt = vt
        self.coeffs = clean
        self.name = name
        if check:
            det_minus_one = {
                vt.key("u[+,1]") + vt.key("u[-,2]"): Q(1),
                vt.key("u[+,2]") + vt.key("u[-,1]"): Q(-1),
                0: Q(-1),
            }
            if self._apply_terms(det_minus_one):
                raise ValueError(f"derivation {name or ''} does not preserve det = 1")

    def _apply_terms(self, terms: dict) -> dict:
        acc: dict = {}
        for i, c in self.coeffs.items():
            shift = i * WIDTH
            ct = c.terms
            if len(ct) == 1:
                (ck, cv), = ct.items()
                part = kernels.derive(terms, shift, MASK, ck)
                if cv != 1:
                    part = {k: v * cv for k, v in part.items()}
            else:
                part = kernels.mul(kernels.derive(terms, shift, MASK), ct)
            kernels.add_scaled(acc, part, Q(1))
        acc = _truncate(self.vt, acc)
        _check_degree(self.vt, acc)
        return _truncate(self.vt, _reduce(acc))

    def __call__(self, p):
        return self.apply(p)

    def apply(self, p):
        if isinstance(p, PolyMatrix):
            return p.map(self.apply)
        return Poly(self.vt, self._apply_terms(p.terms), reduced=True)

    def __add__(self, other: "Derivation") -> "Derivation":
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out[i] + c if i in out else c
        return Derivation(self.vt, out, check=False)

    def scale(self, c) -> "Derivation":
        return Derivation(self.vt, {i: p.scale(c) for i, p in self.coeffs.items()}, check=False)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other: "Derivation") -> "Derivation":
        return self + (-other)

    def bracket(self, other: "Derivation") -> "Derivation":
        """[self, other] as vector fields: coefficient of d/dv is self(other_v) - other(self_v)."""
        out = {}
        for i in set(self.coeffs) | set(other.coeffs):
            zero = Poly.zero(self.vt)
            a = self.apply(other.coeffs.get(i, zero))
            b = other.apply(self.coeffs.get(i, zero))
            out[i] = a - b
        return Derivation(self.vt, out, check=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, Derivation) and self.coeffs == other.coeffs

    def __repr__(self):
        body = " + ".join(f"({c.to_text()})*d/d{self.vt.names[i]}" for i, c in sorted(self.coeffs.items()))
        return f"Derivation[{self.name}]({body or '0'})"


class PolyMatrix:
    """A square matrix of Poly over a common VarTable."""

    __slots__ = ("vt", "rows")

    def __init__(self, vt: VarTable, rows: Sequence[Sequence[Poly]]):
        rows = [list(r) for r in rows]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("PolyMatrix must be square")
        self.vt = vt
        self.rows = rows

    @property
    def size(self) -> int:
        return len(self.rows)

    @staticmethod
    def zero(vt: VarTable, r: int) -> "PolyMatrix":
        return PolyMatrix(vt, [[Poly.zero(vt) for _ in range(r)] for _ in range(r)])

    @staticmethod
    def identity(vt: VarTable, r: int) -> "PolyMatrix":
        return PolyMatrix(vt, [[Poly.const(vt, int(i == j)) for j in range(r)] for i in range(r)])

    @staticmethod
    def constant(vt: VarTable, M) -> "PolyMatrix":
        return PolyMatrix(vt, [[Poly.const(vt, x) for x in row] for row in M])

    @staticmethod
    def scalar_times(p: Poly, M) -> "PolyMatrix":
        return PolyMatrix(p.vt, [[p.scale(x) for x in row] for row in M])

    def map(self, f) -> "PolyMatrix":
        return PolyMatrix(self.vt, [[f(x) for x in row] for row in self.rows])

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._same(other)
        return PolyMatrix(self.vt, [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._same(other)
        return PolyMatrix(self.vt, [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self) -> "PolyMatrix":
        return self.map(lambda p: -p)

    def _same(self, other):
        if not isinstance(other, PolyMatrix) or other.size != self.size:
            raise ValueError("shape mismatch")

    def scale(self, c) -> "PolyMatrix":
        if isinstance(c, Poly):
            return self.map(lambda p: p * c)
        return self.map(lambda p: p.scale(c))

    def __mul__(self, other):
        if isinstance(other, PolyMatrix):
            return self @ other
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._same(other)
        n = self.size
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc: dict = {}
                for k in range(n):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a.terms and b.terms:
                        kernels.add_scaled(acc, kernels.mul(a.terms, b.terms), Q(1))
                acc = _truncate(self.vt, acc)
                _check_degree(self.vt, acc)
                row.append(Poly(self.vt, _truncate(self.vt, _reduce(acc)), reduced=True))
            out.append(row)
        return PolyMatrix(self.vt, out)

    def __pow__(self, n: int) -> "PolyMatrix":
        out = PolyMatrix.identity(self.vt, self.size)
        for _ in range(n):
            out = out @ self
        return out

    def commutator(self, other: "PolyMatrix") -> "PolyMatrix":
        return self @ other - other @ self

    def is_zero(self) -> bool:
        return all(p.is_zero() for row in self.rows for p in row)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyMatrix) and self.size == other.size and all(
            a == b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb)
        )

    def __hash__(self):
        return hash(tuple(hash(p) for row in self.rows for p in row))

    def entries(self) -> Iterable[Poly]:
        for row in self.rows:
            yield from row

    def constant_part(self) -> List[List[object]]:
        return [[p.constant_term() for p in row] for row in self.rows]

    def charges(self) -> set:
        out = set()
        for p in self.entries():
            out |= p.charges()
        return out

    def to_text(self) -> str:
        return "[" + ", ".join("[" + ", ".join(p.to_text() for p in row) + "]" for row in self.rows) + "]"

    def __repr__(self):
        return f"PolyMatrix({self.to_text()})"

    def substitute_param(self, name: str, value) -> "PolyMatrix":
        return self.map(lambda p: p.substitute_param(name, value))

    def max_abs_coefficient(self) -> float:
        from .scalars import to_complex

        return max((abs(to_complex(c)) for p in self.entries() for c in p.terms.values()), default=0.0)


def reduce(p: Poly) -> Poly:
    """Canonical representative; Poly values are always reduced, so this re-reduces defensively."""
    return Poly(p.vt, p.terms)


def apply(D: Derivation, p: Poly) -> Poly:
    return D.apply(p)


def apply_matrix(D: Derivation, M: PolyMatrix) -> PolyMatrix:
    return M.map(D.apply)


# sl(2) action on pure-u term dictionaries, used by the raising solver.
def _dpp_terms(d: dict) -> dict:
    acc = kernels.derive(d, S_M1, MASK, 1 << S_P1)
    kernels.add_scaled(acc, kernels.derive(d, S_M2, MASK, 1 << S_P2), Q(1))
    return _reduce(acc)


def _dmm_terms(d: dict) -> dict:
    acc = kernels.derive(d, S_P1, MASK, 1 << S_M1)
    kernels.add_scaled(acc, kernels.derive(d, S_P2, MASK, 1 << S_M2), Q(1))
    return _reduce(acc)


def _charge2_basis(max_deg: int) -> List[int]:
    """Reduced u-monomials of charge 2 and degree <= max_deg."""
    out = []
    for a in range(max_deg + 1):
        for b in range(max_deg + 1 - a):
            for c in range(max_deg + 1 - a - b):
                for d in range(max_deg + 1 - a - b - c):
                    if a + b - c - d != 2 or (a and d):
                        continue
                    out.append((a << S_P1) | (b << S_P2) | (c << S_M1) | (d << S_M2))
    return out


@lru_cache(maxsize=None)
def _raising_solver(max_deg: int):
    """For charge-2 u-polynomials of degree <= max_deg: basis, inverse of d++ d-- on it, and d-- of each basis element."""
    basis = _charge2_basis(max_deg)
    index = {k: i for i, k in enumerate(basis)}
    n = len(basis)
    L = linalg.zeros(n, n)
    lowered = []
    for j, k in enumerate(basis):
        low = _dmm_terms({k: Q(1)})
        lowered.append(low)
        for kk, c in _dpp_terms(low).items():
            L[index[kk]][j] = c
    Linv = linalg.inv(L)
    columns = [{i: Linv[i][j] for i in range(n) if Linv[i][j] != 0} for j in range(n)]
    return index, columns, lowered


def solve_raising(g: Poly, max_degree: Optional[int] = None) -> Poly:
    """The f with d++ f = g, d0 f = 0 and no Sp(1)-invariant component (f lies in the image of d--).

    Solved by an exact linear system over reduced charge-2 u-monomials:
    f = d-- h with d++ d-- h = g.
    """
    if g.is_zero():
        return Poly.zero(g.vt)
    if g.charges() != {2}:
        raise ValueError(f"solve_raising needs charge 2, got charges {sorted(g.charges())}")
    deg = g.max_u_degree()
    if max_degree is not None and deg > max_degree:
        raise DegreeBoundError(f"u-degree {deg} exceeds {max_degree}")
    index, columns, lowered = _raising_solver(deg)
    groups: Dict[int, Dict[int, object]] = {}
    for k, c in g.terms.items():
        groups.setdefault(k & ~U_MASK, {})[k & U_MASK] = c
    out: dict = {}
    for xkey, ucoeffs in groups.items():
        h: Dict[int, object] = {}
        for uk, c in ucoeffs.items():
            j = index.get(uk)
            if j is None:
                raise InconsistentSystem("right-hand side outside the charge-2 basis")
            for i, v in columns[j].items():
                h[i] = h.get(i, Q(0)) + v * c
        for i, hi in h.items():
            if hi == 0:
                continue
            for uk, c in lowered[i].items():
                kk = xkey + uk
                out[kk] = out.get(kk, Q(0)) + hi * c
    f = Poly(g.vt, _truncate(g.vt, out), reduced=True)
    return f


def invert(M: PolyMatrix) -> PolyMatrix:
    """Inverse of (invertible constant) + (part nilpotent after scaling by the constant's inverse).

    Terminates by nilpotency (at most r steps) or by the parameter truncation
    of the ring; anything else is outside the supported class.
    """
    r = M.size
    vt = M.vt
    C = M.constant_part()
    try:
        Cinv = linalg.inv(C)
    except ZeroDivisionError:
        raise ValueError("non-invertible in the supported class: singular constant part") from None
    Cinv_m = PolyMatrix.constant(vt, Cinv)
    N = Cinv_m @ M - PolyMatrix.identity(vt, r)
    limit = r
    for _, order in vt.truncations:
        limit = max(limit, (order + 1) * r)
    total = PolyMatrix.identity(vt, r)
    term = PolyMatrix.identity(vt, r)
    for _ in range(limit):
        term = -(term @ N)
        if term.is_zero():
            break
        total = total + term
    else:
        if not (term @ N).is_zero():
            raise ValueError("non-invertible in the supported class: non-nilpotent polynomial part")
    out = total @ Cinv_m
    if not (M @ out == PolyMatrix.identity(vt, r)):
        raise ArithmeticError("inverse failed the multiply-back check")
    return out
