"""Exterior algebra on a finite-dimensional (pseudo-)metric vector space.

Forms store one coefficient per strictly increasing index tuple (0-based).
The stored coefficient at ``(i, j, k, l)`` is the value of the form on
``(e_i, e_j, e_k, e_l)``; for a fully antisymmetric component tensor this is
``4! * Omega_ijkl``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import gmpy2
import numpy as np

from . import linalg
from .scalars import GaussQ, Q, exact_sqrt, is_exact, parts, to_complex

Index = Tuple[int, ...]


def _norm(x):
    t = type(x)
    if t is gmpy2.mpfr(0).__class__:
        return float(x)
    if t is gmpy2.mpc(0).__class__:
        return complex(x)
    if isinstance(x, int):
        return Q(x)
    return x


def perm_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 if it has a repeat."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """An oriented vector space with a nondegenerate symmetric bilinear form.

    ``volume`` selects the square root used for the volume form:
    ``"real"`` takes sqrt(|det g|), so <vol, vol> = sign(det g);
    ``"complex"`` takes the principal sqrt(det g) in Q(i), so <vol, vol> = 1.
    ``vol_scale`` overrides both when det g has no exact root.
    """

    dim: int
    gram: Tuple[Tuple[object, ...], ...]
    orientation: int = 1
    volume: str = "real"
    vol_scale: Optional[object] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        g = tuple(tuple(_norm(Q(x) if isinstance(x, int) else x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        n = self.dim
        if len(g) != n or any(len(r) != n for r in g):
            raise ValueError("gram must be dim x dim")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("gram must be symmetric")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.volume not in ("real", "complex"):
            raise ValueError("volume must be 'real' or 'complex'")
        exact = all(is_exact(x) for row in g for x in row)
        object.__setattr__(self, "_exact", exact)
        if exact:
            d = linalg.det([list(r) for r in g])
            if d == 0:
                raise ValueError("degenerate metric")
            ginv = linalg.inv([list(r) for r in g])
        else:
            arr = np.array(g, dtype=complex)
            d = complex(np.linalg.det(arr))
            if abs(d) < 1e-300:
                raise ValueError("degenerate metric")
            ginv = np.linalg.inv(arr)
            if np.all(np.isreal(arr)):
                d = d.real
                ginv = ginv.real
            ginv = [[_norm(complex(x)) if isinstance(x, complex) else float(x) for x in row] for row in ginv]
        object.__setattr__(self, "det", d)
        object.__setattr__(self, "ginv", tuple(tuple(r) for r in ginv))
        if self.vol_scale is None:
            object.__setattr__(self, "vol_scale", self.orientation * self._root(d, exact))

    def _root(self, d, exact):
        real_det = is_exact(d) and parts(d)[1] == 0 if exact else not isinstance(d, complex)
        if exact:
            target = d
            if self.volume == "real":
                if not real_det:
                    raise ValueError("real volume convention needs a real metric")
                target = abs(parts(d)[0])
            root = exact_sqrt(target)
            if root is None:
                raise ValueError(f"det g = {d} has no exact square root; pass vol_scale")
            return root
        if self.volume == "real":
            return float(np.sqrt(abs(d)))
        return complex(np.sqrt(complex(d)))

    @staticmethod
    def euclidean(n: int) -> "MetricSpace":
        return MetricSpace(n, tuple(tuple(Q(int(i == j)) for j in range(n)) for i in range(n)))

    @staticmethod
    def diagonal(entries: Sequence[object], **kw) -> "MetricSpace":
        n = len(entries)
        return MetricSpace(n, tuple(tuple(Q(entries[i]) if i == j else Q(0) for j in range(n)) for i in range(n)), **kw)

    @staticmethod
    def lorentzian(n: int, **kw) -> "MetricSpace":
        return MetricSpace.diagonal([1] * (n - 1) + [-1], **kw)

    @property
    def signature_sign(self) -> int:
        """sign(det g) for real metrics."""
        d = self.det
        if isinstance(d, GaussQ) or isinstance(d, complex):
            raise ValueError("sign(det g) undefined for complex metrics")
        return 1 if d > 0 else -1

    def same(self, other: "MetricSpace") -> bool:
        return self is other or (
            self.dim == other.dim
            and self.gram == other.gram
            and self.orientation == other.orientation
            and self.vol_scale == other.vol_scale
        )

    def inner_basis(self, I: Index, J: Index):
        """<e^I, e^J> = det of the (I, J) minor of the inverse metric."""
        if len(I) != len(J):
            return Q(0)
        if not I:
            return Q(1)
        minor = [[self.ginv[i][j] for j in J] for i in I]
        if self._exact:
            return linalg.det(minor)
        return _norm(complex(np.linalg.det(np.array(minor, dtype=complex)))) if any(
            isinstance(x, complex) for row in minor for x in row
        ) else float(np.linalg.det(np.array(minor, dtype=float)))

    def lambda_gram(self, p: int) -> List[List[object]]:
        """Gram matrix of the induced inner product on the lexicographic basis of degree p."""
        key = ("gram", p)
        if key not in self._cache:
            basis = list(combinations(range(self.dim), p))
            self._cache[key] = [[self.inner_basis(I, J) for J in basis] for I in basis]
        return self._cache[key]

    def hodge_table(self, p: int) -> Dict[Index, Dict[Index, object]]:
        """Image of each basis p-form under the Hodge star."""
        key = ("hodge", p)
        if key in self._cache:
            return self._cache[key]
        n = self.dim
        full = tuple(range(n))
        basis = list(combinations(full, p))
        gram = self.lambda_gram(p)
        table: Dict[Index, Dict[Index, object]] = {}
        for j, J in enumerate(basis):
            out: Dict[Index, object] = {}
            for i, I in enumerate(basis):
                c = gram[i][j]
                if c == 0:
                    continue
                comp = tuple(k for k in full if k not in I)
                out[comp] = _norm(perm_sign(I + comp) * c * self.vol_scale)
            table[J] = out
        self._cache[key] = table
        return table


class Form:
    """An exterior form of fixed degree on a MetricSpace."""

    __slots__ = ("space", "degree", "coeffs")

    def __init__(self, space: MetricSpace, degree: int, coeffs: Optional[Dict[Index, object]] = None):
        if not 0 <= degree <= space.dim:
            raise ValueError(f"degree {degree} out of range for dimension {space.dim}")
        clean: Dict[Index, object] = {}
        for key, c in (coeffs or {}).items():
            key = tuple(key)
            if len(key) != degree or any(a >= b for a, b in zip(key, key[1:])):
                raise ValueError(f"key {key} is not a strictly increasing {degree}-tuple")
            if key and not (0 <= key[0] and key[-1] < space.dim):
                raise ValueError(f"key {key} out of range")
            c = _norm(c)
            if c != 0:
                clean[key] = c
        self.space = space
        self.degree = degree
        self.coeffs = clean

    @staticmethod
    def from_terms(space: MetricSpace, degree: int, terms: Iterable[Tuple[Sequence[int], object]]) -> "Form":
        """Build a form from (possibly unsorted, repeated) index tuples."""
        acc: Dict[Index, object] = {}
        for idx, c in terms:
            s = perm_sign(idx)
            if s == 0 or c == 0:
                continue
            key = tuple(sorted(idx))
            acc[key] = acc.get(key, Q(0)) + s * c
        return Form(space, degree, acc)

    @staticmethod
    def basis(space: MetricSpace, *idx: int) -> "Form":
        return Form.from_terms(space, len(idx), [(idx, Q(1))])

    @staticmethod
    def volume(space: MetricSpace) -> "Form":
        return Form(space, space.dim, {tuple(range(space.dim)): space.vol_scale})

    def __repr__(self):
        return f"Form(deg={self.degree}, {dict(sorted(self.coeffs.items()))})"

    def _check(self, other: "Form"):
        if not self.space.same(other.space):
            raise ValueError("forms live on different spaces")
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, Q(0)) + c
        return Form(self.space, self.degree, out)

    def __neg__(self) -> "Form":
        return Form(self.space, self.degree, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, c) -> "Form":
        return Form(self.space, self.degree, {k: c * v for k, v in self.coeffs.items()})

    def __mul__(self, c) -> "Form":
        return self.scale(c)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.space.same(other.space) and self.degree == other.degree and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.degree, frozenset(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def max_abs(self) -> float:
        return max((abs(to_complex(c)) for c in self.coeffs.values()), default=0.0)

    def evaluate(self, *vectors: Sequence[object]):
        """Value on ``degree`` vectors given by their components."""
        if len(vectors) != self.degree:
            raise ValueError("wrong number of vectors")
        total = Q(0)
        for key, c in self.coeffs.items():
            minor = [[v[k] for k in key] for v in vectors]
            total = total + c * linalg.det(minor)
        return total


def wedge(a: Form, b: Form) -> Form:
    if not a.space.same(b.space):
        raise ValueError("forms live on different spaces")
    if a.degree + b.degree > a.space.dim:
        raise ValueError("degree exceeds dimension")
    out: Dict[Index, object] = {}
    for ka, ca in a.coeffs.items():
        sa = set(ka)
        for kb, cb in b.coeffs.items():
            if sa.intersection(kb):
                continue
            s = perm_sign(ka + kb)
            key = tuple(sorted(ka + kb))
            out[key] = out.get(key, Q(0)) + s * ca * cb
    return Form(a.space, a.degree + b.degree, out)


def wedge_all(forms: Sequence[Form]) -> Form:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def inner(a: Form, b: Form):
    """Induced (bilinear, not Hermitian) inner product of two p-forms."""
    a._check(b)
    sp = a.space
    total = Q(0)
    for ka, ca in a.coeffs.items():
        for kb, cb in b.coeffs.items():
            g = sp.inner_basis(ka, kb)
            if g != 0:
                total = total + ca * cb * g
    return _norm(total)


def hodge(a: Form) -> Form:
    table = a.space.hodge_table(a.degree)
    out: Dict[Index, object] = {}
    for k, c in a.coeffs.items():
        for key, h in table[k].items():
            out[key] = out.get(key, Q(0)) + c * h
    return Form(a.space, a.space.dim - a.degree, out)


def _check_degrees(Omega: Form, omega: Form):
    if Omega.degree != 4 or omega.degree != 2:
        raise ValueError(f"degree mismatch: need (4, 2), got ({Omega.degree}, {omega.degree})")
    if not Omega.space.same(omega.space):
        raise ValueError("forms live on different spaces")


def b_omega_def(Omega: Form, omega: Form) -> Form:
    """B_Omega(omega) = *(*Omega ^ omega)."""
    _check_degrees(Omega, omega)
    return hodge(wedge(hodge(Omega), omega))


def antisymmetric_components(f: Form) -> Dict[Index, object]:
    """Fully antisymmetric component tensor T with f = sum over all ordered tuples T_I e^I."""
    fact = 1
    for k in range(2, f.degree + 1):
        fact *= k
    out: Dict[Index, object] = {}
    for key, c in f.coeffs.items():
        base = c / fact if is_exact(c) else c / float(fact)
        for perm in permutations(range(f.degree)):
            idx = tuple(key[i] for i in perm)
            out[idx] = perm_sign(perm) * base
    return out


def b_omega_contract(Omega: Form, omega: Form) -> Form:
    """12 * sum g^{ii'} g^{jj'} Omega_{ijkl} omega_{i'j'} e^k ^ e^l."""
    _check_degrees(Omega, omega)
    sp = Omega.space
    ginv = sp.ginv
    n = sp.dim
    w = antisymmetric_components(omega)
    raised: Dict[Tuple[int, int], object] = {}
    for (a, b), c in w.items():
        for i in range(n):
            gia = ginv[i][a]
            if gia == 0:
                continue
            for j in range(n):
                gjb = ginv[j][b]
                if gjb == 0:
                    continue
                raised[(i, j)] = raised.get((i, j), Q(0)) + gia * gjb * c
    Om = antisymmetric_components(Omega)
    terms = []
    for (i, j, k, l), c in Om.items():
        r = raised.get((i, j))
        if r is None or r == 0:
            continue
        terms.append(((k, l), 12 * c * r))
    return Form.from_terms(sp, 2, terms)


def lambda2_basis(n: int) -> List[Index]:
    return list(combinations(range(n), 2))


def b_omega_matrix(Omega: Form) -> List[List[object]]:
    """Matrix of B_Omega on the lexicographic basis of 2-forms; column j is the image of basis j."""
    if Omega.degree != 4:
        raise ValueError("need a 4-form")
    sp = Omega.space
    basis = lambda2_basis(sp.dim)
    index = {k: i for i, k in enumerate(basis)}
    N = len(basis)
    M = linalg.zeros(N, N)
    for j, key in enumerate(basis):
        image = b_omega_contract(Omega, Form(sp, 2, {key: Q(1)}))
        for k, c in image.coeffs.items():
            M[index[k]][j] = c
    return M


def form_from_vector(space: MetricSpace, degree: int, vec: Sequence[object]) -> Form:
    basis = list(combinations(range(space.dim), degree))
    return Form(space, degree, {k: v for k, v in zip(basis, vec)})


def form_to_vector(f: Form) -> list:
    basis = list(combinations(range(f.space.dim), f.degree))
    return [f.coeffs.get(k, Q(0)) for k in basis]


@dataclass
class Eigenspace:
    value: object
    multiplicity: int
    basis: list
    exact: bool = False


def _cluster(values: np.ndarray, rtol: float):
    order = np.argsort(-values.real, kind="stable")
    scale_ = max(1.0, float(np.max(np.abs(values)))) if len(values) else 1.0
    groups: List[List[int]] = []
    for idx in order:
        if groups and abs(values[idx] - values[groups[-1][0]]) <= rtol * scale_:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


def spectrum(B, rtol: float = 1e-9, gram=None, exact: bool = False) -> List[Eigenspace]:
    """Eigenvalues of B sorted descending, clustered at relative tolerance ``rtol``.

    ``gram`` (the Gram matrix of the coefficient basis) lets a matrix that is
    self-adjoint but not symmetric be diagonalized by a symmetric solver. With
    ``exact=True`` the eigenvalues are read off the rational characteristic
    polynomial and each eigenspace is computed exactly.
    """
    if exact:
        return exact_spectrum(B)
    A = np.array([[float(x) if is_exact(x) else x for x in row] for row in B], dtype=float)
    n = A.shape[0]
    if n == 0:
        return []
    if gram is not None:
        G = np.array([[float(x) for x in row] for row in gram], dtype=float)
        L = np.linalg.cholesky(G)
        S = L.T @ A @ np.linalg.inv(L.T)
        S = (S + S.T) / 2
        vals, vecs = np.linalg.eigh(S)
        vecs = np.linalg.solve(L.T, vecs)
    elif np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        vals, vecs = np.linalg.eigh((A + A.T) / 2)
    else:
        vals, vecs = np.linalg.eig(A)
        if np.max(np.abs(vals.imag)) > 1e-9 * max(1.0, np.abs(vals).max()):
            raise ArithmeticError("non-real eigenvalues; matrix is not self-adjoint")
        vals = vals.real
        vecs = vecs.real
    if not np.all(np.isfinite(vals)):
        raise ArithmeticError("eigensolver did not converge")
    out = []
    for group in _cluster(vals, rtol):
        v = float(np.mean(vals[group]))
        out.append(Eigenspace(v, len(group), [vecs[:, i] for i in group]))
    assert sum(e.multiplicity for e in out) == n
    return out


def charpoly(B) -> List[object]:
    """Characteristic polynomial det(t I - B), coefficients from t^n down to t^0 (Faddeev-LeVerrier)."""
    n = len(B)
    coeffs = [Q(1)]
    BM = linalg.zeros(n, n)
    c = Q(1)
    for k in range(1, n + 1):
        M = [row[:] for row in BM]
        for i in range(n):
            M[i][i] = M[i][i] + c
        BM = linalg.matmul(B, M)
        c = -sum((BM[i][i] for i in range(n)), Q(0)) / k
        coeffs.append(c)
    return coeffs


def _poly_div_root(coeffs, r):
    """Synthetic division by (t - r); returns (quotient, remainder)."""
    out = [coeffs[0]]
    for c in coeffs[1:]:
        out.append(c + out[-1] * r)
    return out[:-1], out[-1]


def exact_spectrum(B) -> List[Eigenspace]:
    """Rational eigenvalues of an exact matrix with exact eigenspaces.

    Candidates come from a float eigensolver and are confirmed by exact
    division of the characteristic polynomial; any irrational part of the
    spectrum is reported with ``exact=False`` and a float value.
    """
    n = len(B)
    poly = charpoly(B)
    A = np.array([[float(x) for x in row] for row in B], dtype=float)
    approx = np.linalg.eigvals(A) if n else np.array([])
    from fractions import Fraction

    found: Dict[object, int] = {}
    for v in sorted(set(np.round(approx.real, 9))):
        r = Fraction(float(v)).limit_denominator(10**6)
        r = Q(r)
        if r in found:
            continue
        mult = 0
        while len(poly) > 1:
            q, rem = _poly_div_root(poly, r)
            if rem != 0:
                break
            poly = q
            mult += 1
        if mult:
            found[r] = mult
    out = []
    for val in sorted(found, reverse=True):
        shifted = linalg.sub(B, linalg.scale(linalg.identity(n), val))
        basis = linalg.nullspace(shifted)
        out.append(Eigenspace(val, found[val], basis, exact=True))
    if len(poly) > 1:
        rest = np.roots([float(c) for c in poly])
        for group in _cluster(rest, 1e-9):
            out.append(Eigenspace(float(np.mean(rest[group].real)), len(group), [], exact=False))
        out.sort(key=lambda e: -float(e.value))
    return out


def multiplicities(spec: List[Eigenspace]) -> List[int]:
    return sorted(e.multiplicity for e in spec)


@dataclass
class SelfDualityResult:
    ok: bool
    residual: float


def selfduality_check(Omega: Form, lam, F: Dict[Index, List[List[object]]], tol: float = 1e-9) -> SelfDualityResult:
    """Check B_Omega F = lam F for a matrix-valued 2-form given by its increasing-key components."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    sp = Omega.space
    M = b_omega_matrix(Omega)
    basis = lambda2_basis(sp.dim)
    shapes = {(len(m), len(m[0])) for m in F.values()}
    if len(shapes) > 1:
        raise ValueError("inconsistent matrix shapes")
    if not F:
        return SelfDualityResult(True, 0.0)
    rows, cols = shapes.pop()
    exact = all(is_exact(x) for m in F.values() for row in m for x in row) and is_exact(lam)
    worst = 0.0
    zero = True
    for a in range(rows):
        for b in range(cols):
            vec = [F[k][a][b] if k in F else Q(0) for k in basis]
            image = linalg.matvec(M, vec)
            for x, y in zip(image, vec):
                d = _norm(x - lam * y)
                if d != 0:
                    zero = False
                    worst = max(worst, abs(to_complex(d)))
    ok = zero if exact else worst <= tol
    return SelfDualityResult(ok, worst)
