"""Concrete invariant 4-forms, the symmetrized pairing on S^m(C^2), and the torsion projector."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations, product
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .exterior import Form, MetricSpace, b_omega_contract, perm_sign, wedge
from .scalars import Q

# Quaternion basis 1, i, j, k: QUAT[a][b] = (sign, index) of e_a * e_b.
QUAT = (
    ((1, 0), (1, 1), (1, 2), (1, 3)),
    ((1, 1), (-1, 0), (1, 3), (-1, 2)),
    ((1, 2), (-1, 3), (-1, 0), (1, 1)),
    ((1, 3), (1, 2), (-1, 1), (-1, 0)),
)

EPS = ((Q(0), Q(1)), (Q(-1), Q(0)))


def _qmul(a, b):
    out = [0] * 4
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    s, k = QUAT[i][j]
                    out[k] += s * x * y
    return out


def _qconj(a):
    return [a[0], -a[1], -a[2], -a[3]]


class OctonionAlgebra:
    """Octonions as pairs of quaternions with (a, b)(c, d) = (ac - d*b, da + bc*).

    Basis index 0 is the unit, 1..3 are i, j, k and 4..7 are l, il, jl, kl
    (that is, (0, e_0) .. (0, e_3)).
    """

    def __init__(self):
        table = []
        for a in range(8):
            row = []
            for b in range(8):
                prod_ = self.mul([int(i == a) for i in range(8)], [int(i == b) for i in range(8)])
                (k,) = [i for i, v in enumerate(prod_) if v]
                row.append((prod_[k], k))
            table.append(tuple(row))
        self.table = tuple(table)

    @staticmethod
    def mul(x: Sequence[int], y: Sequence[int]) -> list:
        a, b, c, d = list(x[:4]), list(x[4:]), list(y[:4]), list(y[4:])
        left = [p - q for p, q in zip(_qmul(a, c), _qmul(_qconj(d), b))]
        right = [p + q for p, q in zip(_qmul(d, a), _qmul(b, _qconj(c)))]
        return left + right

    @staticmethod
    def inner(x: Sequence, y: Sequence):
        return sum(p * q for p, q in zip(x, y))

    def associator(self, x, y, z) -> list:
        return [p - q for p, q in zip(self.mul(self.mul(x, y), z), self.mul(x, self.mul(y, z)))]

    def unit(self, k: int) -> list:
        return [int(i == k) for i in range(8)]


def g2_space() -> MetricSpace:
    """Euclidean R^7 on Im(O), oriented by phi: (i_x phi)^2 ^ phi = 6|x|^2 vol."""
    return MetricSpace(7, tuple(tuple(Q(int(i == j)) for j in range(7)) for i in range(7)), orientation=-1)


def associator_form(O: Optional[OctonionAlgebra] = None, space: Optional[MetricSpace] = None) -> Form:
    """The raw 4-form <[x, y, z], w> on Im(O); equals 2 * hodge(phi)."""
    O = O or OctonionAlgebra()
    space = space or g2_space()
    coeffs = {}
    for I in combinations(range(7), 4):
        x, y, z, w = (O.unit(t + 1) for t in I)
        coeffs[I] = Q(O.inner(O.associator(x, y, z), w))
    return Form(space, 4, coeffs)


def g2_forms() -> Tuple[Form, Form]:
    """(phi, psi) on R^7 with phi(x, y, z) = <xy, z> and psi = hodge(phi) = <[x, y, z], w> / 2."""
    O = OctonionAlgebra()
    space = g2_space()
    phi = {}
    for i, j, k in combinations(range(7), 3):
        phi[(i, j, k)] = Q(O.inner(O.mul(O.unit(i + 1), O.unit(j + 1)), O.unit(k + 1)))
    psi = associator_form(O, space).scale(Q(1, 2))
    return Form(space, 3, phi), psi


def spin7_space() -> MetricSpace:
    return MetricSpace(8, tuple(tuple(Q(int(i == j)) for j in range(8)) for i in range(8)), orientation=-1)


def spin7_form() -> Form:
    """dt ^ phi + psi on R^8 = R (t, index 0) + Im(O) (indices 1..7)."""
    phi, psi = g2_forms()
    coeffs = {}
    for (i, j, k), c in phi.coeffs.items():
        coeffs[(0, i + 1, j + 1, k + 1)] = c
    for (i, j, k, l), c in psi.coeffs.items():
        coeffs[(i + 1, j + 1, k + 1, l + 1)] = c
    return Form(spin7_space(), 4, coeffs)


def right_mult_matrix(q: int) -> List[List[object]]:
    """4x4 matrix of x -> x e_q on H = R^4."""
    M = linalg.zeros(4, 4)
    for b in range(4):
        s, k = QUAT[b][q]
        M[k][b] = Q(s)
    return M


def _block_diag(block: List[List[object]], m: int) -> List[List[object]]:
    n = len(block)
    out = linalg.zeros(n * m, n * m)
    for t in range(m):
        for i in range(n):
            for j in range(n):
                out[t * n + i][t * n + j] = block[i][j]
    return out


@dataclass(frozen=True)
class QuaternionTriple:
    J1: Tuple[Tuple[object, ...], ...]
    J2: Tuple[Tuple[object, ...], ...]
    J3: Tuple[Tuple[object, ...], ...]

    @staticmethod
    def standard(m: int) -> "QuaternionTriple":
        if m < 1:
            raise ValueError("m must be >= 1")
        J1 = _block_diag(right_mult_matrix(1), m)
        J2 = _block_diag(right_mult_matrix(2), m)
        J3 = linalg.matmul(J1, J2)
        return QuaternionTriple(*(tuple(map(tuple, J)) for J in (J1, J2, J3)))

    def matrices(self):
        return [[list(r) for r in J] for J in (self.J1, self.J2, self.J3)]

    def rotated(self, R: Sequence[Sequence[object]]) -> "QuaternionTriple":
        """Frame (sum_b R[a][b] J_b)_a for a rotation R in SO(3)."""
        Js = self.matrices()
        new = []
        for a in range(3):
            acc = linalg.zeros(len(Js[0]), len(Js[0]))
            for b in range(3):
                acc = linalg.add(acc, linalg.scale(Js[b], Q(R[a][b])))
            new.append(tuple(map(tuple, acc)))
        return QuaternionTriple(*new)

    def check(self) -> bool:
        J1, J2, J3 = self.matrices()
        n = len(J1)
        minus_id = linalg.scale(linalg.identity(n), Q(-1))
        ok = all(linalg.matmul(J, J) == minus_id for J in (J1, J2, J3))
        ok = ok and linalg.matmul(J1, J2) == J3 and linalg.matmul(J2, J1) == linalg.scale(J3, Q(-1))
        return ok and all(linalg.transpose(J) == linalg.scale(J, Q(-1)) for J in (J1, J2, J3))


def rotation_from_quaternion(q: Sequence[object]) -> List[List[object]]:
    """SO(3) matrix of x -> q x q^-1 on Im(H); exact for rational q."""
    a, b, c, d = (Q(x) for x in q)
    n = a * a + b * b + c * c + d * d
    R = [
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d],
    ]
    return [[x / n for x in row] for row in R]


def two_form_of(J: Sequence[Sequence[object]], space: MetricSpace) -> Form:
    """omega(x, y) = g(J x, y) for the space's metric."""
    gJ = linalg.matmul([list(r) for r in space.gram], [list(r) for r in J])
    n = space.dim
    # omega(e_a, e_b) = sum_c g(e_b, e_c) J[c][a] = (g J)[b][a]
    return Form(space, 2, {(a, b): gJ[b][a] for a in range(n) for b in range(a + 1, n)})


def quaternionic_form(m: int, triple: Optional[QuaternionTriple] = None) -> Form:
    """sum_a omega_a ^ omega_a on R^{4m}."""
    if m < 1:
        raise ValueError("m must be >= 1")
    triple = triple or QuaternionTriple.standard(m)
    space = MetricSpace.euclidean(4 * m)
    out = Form(space, 4)
    for J in triple.matrices():
        w = two_form_of(J, space)
        out = out + wedge(w, w)
    return out


def hyperkaehler_form(m: int, a: int = 1, b: int = 1) -> Form:
    """omega_a ^ omega_b on R^{4m}: one of the six parallel 4-forms of a flat hyper-Kaehler model."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if a not in (1, 2, 3) or b not in (1, 2, 3):
        raise ValueError("a, b must be in {1, 2, 3}")
    Js = QuaternionTriple.standard(m).matrices()
    space = MetricSpace.euclidean(4 * m)
    return wedge(two_form_of(Js[a - 1], space), two_form_of(Js[b - 1], space))


def kaehler_form(m: int, space: Optional[MetricSpace] = None) -> Form:
    space = space or MetricSpace.euclidean(2 * m)
    return Form(space, 2, {(2 * k, 2 * k + 1): Q(1) for k in range(m)})


def kaehler_form_sq(m: int) -> Form:
    if m < 2:
        raise ValueError("m must be >= 2")
    w = kaehler_form(m)
    return wedge(w, w)


def _commutator(a, b):
    return linalg.sub(linalg.matmul(a, b), linalg.matmul(b, a))


def kostant_form(lie_basis: Sequence[Sequence[Sequence[object]]], B=None, space: Optional[MetricSpace] = None) -> Form:
    """alt(B) in Lambda^4 for a subalgebra of so(V), with B given by its Gram matrix on the basis.

    Each X_a is read as the 2-form sum_{i<j} (X_a)_ij e^i ^ e^j and the result is
    sum_{a,b} B^{ab} X_a ^ X_b with B^{ab} the inverse Gram matrix. ``B=None``
    uses the trace form tr(X_a X_b).
    """
    basis = [linalg.as_matrix(X) for X in lie_basis]
    if not basis:
        raise ValueError("degenerate B: empty Lie algebra")
    n = len(basis[0])
    space = space or MetricSpace.euclidean(n)
    for X in basis:
        if len(X) != n or linalg.transpose(X) != linalg.scale(X, Q(-1)):
            raise ValueError("basis elements must be antisymmetric n x n matrices")
    flat = [[x for row in X for x in row] for X in basis]
    if linalg.rank(flat) != len(flat):
        raise ValueError("lie_basis is linearly dependent")
    for X, Y in combinations(basis, 2):
        Z = _commutator(X, Y)
        if not linalg.in_span(flat, [x for row in Z for x in row]):
            raise ValueError("basis not closed under bracket")
    if B is None:
        G = [[_trace(linalg.matmul(X, Y)) for Y in basis] for X in basis]
    else:
        G = linalg.as_matrix(B)
    if linalg.transpose(G) != G:
        raise ValueError("B must be symmetric")
    if linalg.det(G) == 0:
        raise ValueError("degenerate B")
    Ginv = linalg.inv(G)
    forms = [Form(space, 2, {(i, j): X[i][j] for i in range(n) for j in range(i + 1, n)}) for X in basis]
    out = Form(space, 4)
    for a, fa in enumerate(forms):
        for b, fb in enumerate(forms):
            if Ginv[a][b] != 0:
                out = out + wedge(fa, fb).scale(Ginv[a][b])
    return out


def _trace(M):
    return sum((M[i][i] for i in range(len(M))), Q(0))


def so_basis(n: int) -> List[List[List[object]]]:
    out = []
    for i, j in combinations(range(n), 2):
        X = linalg.zeros(n, n)
        X[i][j] = Q(1)
        X[j][i] = Q(-1)
        out.append(X)
    return out


def u2_basis() -> List[List[List[object]]]:
    """u(2) inside so(4): the centralizer of the complex structure e_0 -> e_1, e_2 -> e_3."""
    J = linalg.zeros(4, 4)
    J[1][0], J[0][1], J[3][2], J[2][3] = Q(1), Q(-1), Q(1), Q(-1)
    so4 = so_basis(4)
    # Solve [X, J] = 0 over so(4).
    rows = []
    for k in range(16):
        rows.append([_commutator(X, J)[k // 4][k % 4] for X in so4])
    null = linalg.nullspace(rows)
    out = []
    for v in null:
        X = linalg.zeros(4, 4)
        for c, Y in zip(v, so4):
            X = linalg.add(X, linalg.scale(Y, c))
        out.append(X)
    return out


def multi_indices(m: int) -> List[Tuple[int, ...]]:
    """Sorted multi-indices of length m over {0, 1}, ordered by the number of 1s."""
    return [tuple([0] * (m - k) + [1] * k) for k in range(m + 1)]


def multiplicity(A: Sequence[int]) -> int:
    """Number of distinct orderings of the multi-index A."""
    k = sum(A)
    return factorial(len(A)) // (factorial(k) * factorial(len(A) - k))


def omega_h_power(m: int) -> List[List[object]]:
    """omega_H^m(h_A, h_B) = (1 / (m!)^2) sum over sigma, tau of prod eps(A_sigma(i), B_tau(i))."""
    if m < 1:
        raise ValueError("m must be >= 1")
    idx = multi_indices(m)
    W = linalg.zeros(m + 1, m + 1)
    # the sum over sigma only permutes the factors, contributing m!
    for a, A in enumerate(idx):
        for b, B in enumerate(idx):
            total = 0
            for tau in permutations(range(m)):
                term = Q(1)
                for i in range(m):
                    term = term * EPS[A[i]][B[tau[i]]]
                    if term == 0:
                        break
                total += term
            W[a][b] = Q(total) / factorial(m)
    return W


def omega_h_contraction(m: int):
    """sum_{A,B} omega^{AB} omega_{AB} with omega^{AB} the matrix inverse of omega_{AB}."""
    W = omega_h_power(m)
    Winv = linalg.inv(W)
    return sum((Winv[a][b] * W[a][b] for a in range(m + 1) for b in range(m + 1)), Q(0))


def _tensor_space(omega_E, W) -> MetricSpace:
    gram = linalg.kron(omega_E, W)
    n = len(gram)
    try:
        return MetricSpace(n, tuple(map(tuple, gram)), volume="complex")
    except ValueError:
        # B_Omega uses the Hodge star twice, so it does not depend on the volume normalization.
        return MetricSpace(n, tuple(map(tuple, gram)), volume="complex", vol_scale=Q(1))


def _spin_form(m: int, gamma, W) -> Form:
    p = len(gamma)
    k = m + 1
    space = _tensor_space(gamma, W)
    terms = {}
    pairs_E = [(a, b) for a in range(p) for b in range(p) if gamma[a][b] != 0]
    pairs_H = [(A, C) for A in range(k) for C in range(k) if W[A][C] != 0]
    for (a, b), (c, d) in product(pairs_E, pairs_E):
        e_coef = gamma[a][b] * gamma[c][d]
        for (A, C), (B, D) in product(pairs_H, pairs_H):
            idx = (a * k + A, b * k + B, c * k + C, d * k + D)
            s = perm_sign(idx)
            if s == 0:
                continue
            key = tuple(sorted(idx))
            terms[key] = terms.get(key, Q(0)) + s * e_coef * W[A][C] * W[B][D]
    return Form(space, 4, terms)


def spin_m_form(m: int, omega_E) -> Form:
    """sum omega_ab omega_cd omega_AC omega_BD X^{aA} ^ X^{bB} ^ X^{cC} ^ X^{dD} for odd m.

    The space is E (x) S^m H of dimension rank(E) * (m + 1) with metric omega_E (x) omega_H^m.
    """
    if m % 2 == 0:
        raise ValueError("m must be odd; use spin_m_form_even")
    omega_E = linalg.as_matrix(omega_E)
    if linalg.transpose(omega_E) != linalg.scale(omega_E, Q(-1)) or linalg.det(omega_E) == 0:
        raise ValueError("omega_E must be antisymmetric and invertible")
    return _spin_form(m, omega_E, omega_h_power(m))


def spin_m_form_even(m: int, gamma_E) -> Form:
    """The even-m variant with a symmetric metric gamma_E on E."""
    if m % 2:
        raise ValueError("m must be even")
    gamma_E = linalg.as_matrix(gamma_E)
    if linalg.transpose(gamma_E) != gamma_E or linalg.det(gamma_E) == 0:
        raise ValueError("gamma_E must be symmetric and invertible")
    return _spin_form(m, gamma_E, omega_h_power(m))


def symmetric_two_form(S, m: int, space: MetricSpace) -> Form:
    """The 2-form sum S_ab omega_AB X^{aA} ^ X^{bB} for symmetric S."""
    W = omega_h_power(m)
    k = m + 1
    p = len(S)
    terms = []
    for a in range(p):
        for b in range(p):
            if S[a][b] == 0:
                continue
            for A in range(k):
                for B in range(k):
                    if W[A][B] != 0:
                        terms.append(((a * k + A, b * k + B), S[a][b] * W[A][B]))
    return Form.from_terms(space, 2, terms)


def spin_m_eigenvalue(m: int, omega_E, S) -> object:
    """lambda with B_Omega(S (x) omega_H^m) = lambda * (S (x) omega_H^m); raises if not proportional."""
    Omega = spin_m_form(m, omega_E)
    w = symmetric_two_form(linalg.as_matrix(S), m, Omega.space)
    if w.is_zero():
        return Q(0)
    image = b_omega_contract(Omega, w)
    key = next(iter(w.coeffs))
    lam = image.coeffs.get(key, Q(0)) / w.coeffs[key]
    if image != w.scale(lam):
        raise ArithmeticError("S (x) omega_H^m is not an eigenvector")
    return lam


class TorsionTensor:
    """Components T^{c gamma}_{a alpha, b beta} on E (x) H with rank E = p, antisymmetric in the lower pairs.

    Stored as a dict keyed by (c, gamma, a, alpha, b, beta), 0-based.
    """

    def __init__(self, p: int, comps: Optional[Dict[Tuple[int, ...], object]] = None):
        self.p = p
        clean = {}
        for key, v in (comps or {}).items():
            if len(key) != 6:
                raise ValueError("torsion keys are (c, gamma, a, alpha, b, beta)")
            c, g, a, al, b, be = key
            if not (max(c, a, b) < p and max(g, al, be) < 2 and min(key) >= 0):
                raise ValueError(f"index out of range in {key}")
            if v != 0:
                clean[key] = Q(v) if isinstance(v, int) else v
        for (c, g, a, al, b, be), v in clean.items():
            if clean.get((c, g, b, be, a, al), Q(0)) != -v:
                raise ValueError("torsion must be antisymmetric under (a alpha) <-> (b beta)")
        self.comps = clean

    def get(self, *key):
        return self.comps.get(key, Q(0))

    def __eq__(self, other):
        return isinstance(other, TorsionTensor) and self.p == other.p and self.comps == other.comps

    def is_zero(self):
        return not self.comps

    @staticmethod
    def from_function(p: int, f) -> "TorsionTensor":
        comps = {}
        for key in product(range(p), range(2), range(p), range(2), range(p), range(2)):
            v = f(*key)
            if v != 0:
                comps[key] = v
        return TorsionTensor(p, comps)


EPS_INV = ((Q(0), Q(-1)), (Q(1), Q(0)))


def admissibility_projector(T: TorsionTensor, m: int = 1) -> Tuple[TorsionTensor, bool]:
    """Component of T in E* (x) Lambda^2 E (x) S^3 H, and whether it vanishes.

    The upper H-index is lowered with eps, the three H-indices are
    symmetrized (which also kills the S^2 E (x) Lambda^2 H part of the
    2-form slot and the eps-trace), and the index is raised again.
    """
    if m != 1:
        raise ValueError("only the rank-(p, 2) model is supported")
    p = T.p
    lowered = {}
    for c, d, a, al, b, be in product(range(p), range(2), range(p), range(2), range(p), range(2)):
        v = T.get(c, d, a, al, b, be)
        if v == 0:
            continue
        for g in range(2):
            if EPS[d][g] != 0:
                key = (c, g, a, al, b, be)
                lowered[key] = lowered.get(key, Q(0)) + v * EPS[d][g]
    sym = {}
    for c, a, b in product(range(p), repeat=3):
        for h in product(range(2), repeat=3):
            total = Q(0)
            for perm in permutations(range(3)):
                al, be, g = (h[i] for i in perm)
                total += lowered.get((c, g, a, al, b, be), Q(0))
            if total != 0:
                sym[(c, h[2], a, h[0], b, h[1])] = total / 6
    out = {}
    for (c, g, a, al, b, be), v in sym.items():
        for d in range(2):
            if EPS_INV[g][d] != 0:
                key = (c, d, a, al, b, be)
                out[key] = out.get(key, Q(0)) + v * EPS_INV[g][d]
    proj = TorsionTensor(p, out)
    return proj, proj.is_zero()


def embed_e_lambda2_s3(p: int, R) -> TorsionTensor:
    """Embed R[c][(a, b)][(alpha, beta, gamma)] (antisymmetric in a, b; symmetric in H) into torsion form."""

    def f(c, d, a, al, b, be):
        total = Q(0)
        for g in range(2):
            if EPS_INV[g][d] != 0:
                total += R(c, a, b, tuple(sorted((al, be, g)))) * EPS_INV[g][d]
        return total

    return TorsionTensor.from_function(p, f)
