"""Half-flat gauge fields from an analytic prepotential (spin 1/2), plus shared connection machinery.

Pipeline: A++ -> Phi (d++ Phi = -A++ Phi, d0 Phi = 0) -> analytic-frame
potentials A--, A(X-) -> central frame C = Phi^-1 A Phi + Phi^-1 d Phi ->
coefficients C^e_alpha of a connection on the base -> curvature, split and
Yang-Mills residual. Every identity the construction relies on is asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import linalg
from .exterior import MetricSpace, perm_sign
from .forms import omega_h_power
from .harmonic import HarmonicModel, analytic_check
from .poly import Poly, PolyMatrix, invert, solve_raising
from .scalars import Q

FrameIndex = Tuple[int, Tuple[int, ...]]


class PipelineError(ValueError):
    """An input was rejected; ``check`` names the failed invariant."""

    def __init__(self, check: str, detail: str = ""):
        self.check = check
        super().__init__(f"{check}: {detail}" if detail else check)


def _require_zero(M: PolyMatrix, check: str):
    if not M.is_zero():
        raise PipelineError(check, f"residual {M.to_text()}")


@dataclass
class PhiResult:
    Phi: PolyMatrix
    iterations: int
    truncation_order: Optional[int]


def solve_phi(A_pp: PolyMatrix, model: HarmonicModel, check: bool = True) -> PhiResult:
    """Phi = Id + sum_k Phi^(k) with d++ Phi^(k) = -A++ Phi^(k-1).

    Exact mode (no series parameter): the iteration must terminate within
    rank steps, which holds when A++ takes values in a nilpotent algebra.
    Series mode: the ring truncation in t bounds the iteration.
    """
    r = A_pp.size
    vt = model.vt
    if check:
        rep = analytic_check(A_pp, model, "halfflat" if model.spin_m == 1 else "0partial", 2)
        if not rep.residuals["charge"].is_zero():
            raise PipelineError("charge check failed: ∂₀A₊₊ ≠ 2A₊₊")
        if not rep.ok:
            raise PipelineError("analyticity check failed", ", ".join(rep.failed()))
    Phi = PolyMatrix.identity(vt, r)
    term = Phi
    limit = r if model.series_order is None else r * (model.series_order + 1)
    k = 0
    while True:
        rhs = -(A_pp @ term)
        if rhs.is_zero():
            break
        k += 1
        if k > limit:
            raise PipelineError("non-nilpotent input in exact mode", "Phi iteration does not terminate")
        term = rhs.map(solve_raising)
        Phi = Phi + term
    if check:
        _require_zero(model.dpp.apply(Phi) + A_pp @ Phi, "Phi equation d++ Phi + A++ Phi = 0")
        _require_zero(model.d0.apply(Phi), "Phi charge d0 Phi = 0")
    return PhiResult(Phi, k, model.series_order)


@dataclass
class AnalyticFramePotentials:
    A_pp: PolyMatrix
    A_mm: PolyMatrix
    A_Xminus: List[PolyMatrix]
    Phi_inv: PolyMatrix


def analytic_potentials(A_pp: PolyMatrix, Phi: PolyMatrix, model: HarmonicModel) -> AnalyticFramePotentials:
    """A-- = -(d-- Phi) Phi^-1 and A(X^e_-) = -X^e_+ A--, with their defining identities asserted."""
    try:
        Phi_inv = invert(Phi)
    except ValueError as exc:
        raise PipelineError("inversion failure", str(exc)) from None
    A_mm = -(model.dmm.apply(Phi) @ Phi_inv)
    _require_zero(model.d0.apply(A_mm) + A_mm.scale(2), "charge of A-- is -2")
    _require_zero(
        model.dpp.apply(A_mm) - model.dmm.apply(A_pp) + A_pp.commutator(A_mm),
        "d++ A-- - d-- A++ + [A++, A--] = 0",
    )
    A_Xm = []
    if model.spin_m == 1:
        for e in range(1, model.rank_E + 1):
            Am = -model.field("X+", e).apply(A_mm)
            _require_zero(model.d0.apply(Am) + Am, f"charge of A(X-[{e}]) is -1")
            A_Xm.append(Am)
    return AnalyticFramePotentials(A_pp, A_mm, A_Xm, Phi_inv)


def gauge_to_central(model: HarmonicModel, Phi: PolyMatrix, Phi_inv: PolyMatrix, D, A: Optional[PolyMatrix]) -> PolyMatrix:
    """Potential along D in the central frame: Phi^-1 A(D) Phi + Phi^-1 D(Phi)."""
    out = Phi_inv @ D.apply(Phi)
    if A is not None and not A.is_zero():
        out = out + Phi_inv @ A @ Phi
    return out


@dataclass
class CentralPotentials:
    C_plus: List[PolyMatrix]
    C_minus: List[PolyMatrix]


def central_frame(model: HarmonicModel, pots: AnalyticFramePotentials, Phi: PolyMatrix) -> CentralPotentials:
    Pinv = pots.Phi_inv
    _require_zero(gauge_to_central(model, Phi, Pinv, model.d0, None), "central frame: C(d0) = 0")
    _require_zero(gauge_to_central(model, Phi, Pinv, model.dpp, pots.A_pp), "central frame: C(d++) = 0")
    _require_zero(gauge_to_central(model, Phi, Pinv, model.dmm, pots.A_mm), "central frame: C(d--) = 0")
    C_plus, C_minus = [], []
    for e in range(1, model.rank_E + 1):
        Cp = gauge_to_central(model, Phi, Pinv, model.field("X+", e), None)
        _require_zero(model.dpp.apply(Cp), f"d++ C(X+[{e}]) = 0")
        _require_zero(model.d0.apply(Cp) - Cp, f"d0 C(X+[{e}]) = C(X+[{e}])")
        C_plus.append(Cp)
        C_minus.append(gauge_to_central(model, Phi, Pinv, model.field("X-", e), pots.A_Xminus[e - 1]))
    return CentralPotentials(C_plus, C_minus)


@dataclass
class ConnectionOnM:
    """Potentials C_i along the coordinate frame of the base; keys (e, A) with A a sorted index tuple."""

    model: HarmonicModel
    potentials: Dict[FrameIndex, PolyMatrix]

    def __post_init__(self):
        for key, C in self.potentials.items():
            if any(p.depends_on_u() for p in C.entries()):
                raise PipelineError("connection depends on u", str(key))

    def potential(self, key: FrameIndex) -> PolyMatrix:
        if key in self.potentials:
            return self.potentials[key]
        return PolyMatrix.zero(self.model.vt, self.model.gauge_rank)

    def ordered(self) -> List[PolyMatrix]:
        return [self.potential(k) for k in self.model.frame_order]


def split_by_u(M: PolyMatrix) -> Dict[int, PolyMatrix]:
    """Map u-monomial key -> coefficient matrix (in the non-u variables)."""
    r = M.size
    out: Dict[int, List[List[Poly]]] = {}
    for i, row in enumerate(M.rows):
        for j, p in enumerate(row):
            for uk, c in p.split_u().items():
                if uk not in out:
                    out[uk] = [[Poly.zero(M.vt) for _ in range(r)] for _ in range(r)]
                out[uk][i][j] = c
    return {uk: PolyMatrix(M.vt, rows) for uk, rows in out.items()}


def extract_C(model: HarmonicModel, central: CentralPotentials) -> ConnectionOnM:
    """Write C(X^e_+) = u_+^1 C^e_1 + u_+^2 C^e_2 with u-free coefficients; any other u-dependence is rejected."""
    vt = model.vt
    keys = {vt.key("u[+,1]"): 1, vt.key("u[+,2]"): 2}
    pots: Dict[FrameIndex, PolyMatrix] = {}
    r = model.gauge_rank
    for e, Cp in enumerate(central.C_plus, start=1):
        parts = split_by_u(Cp)
        extra = [k for k in parts if k not in keys]
        if extra:
            raise PipelineError("nonlinear in u_+", f"C(X+[{e}]) has remainder terms beyond u_+^1, u_+^2")
        for uk, al in keys.items():
            pots[(e, (al,))] = parts.get(uk, PolyMatrix.zero(vt, r))
    conn = ConnectionOnM(model, pots)
    for e, Cm in enumerate(central.C_minus, start=1):
        expect = PolyMatrix.zero(vt, r)
        for al in (1, 2):
            expect = expect + conn.potential((e, (al,))).scale(model.u("-", al))
        _require_zero(Cm - expect, f"C(X-[{e}]) = u_-^alpha C^{e}_alpha")
    return conn


def frame_derivative(model: HarmonicModel, key: FrameIndex, M: PolyMatrix) -> PolyMatrix:
    return model.frame[key].apply(M)


def curvature_components(conn: ConnectionOnM) -> Dict[Tuple[FrameIndex, FrameIndex], PolyMatrix]:
    """F(X_i, X_j) = X_i C_j - X_j C_i + [C_i, C_j] for every ordered pair of frame fields."""
    model = conn.model
    order = model.frame_order
    F: Dict[Tuple[FrameIndex, FrameIndex], PolyMatrix] = {}
    for a, i in enumerate(order):
        F[(i, i)] = PolyMatrix.zero(model.vt, model.gauge_rank)
        for j in order[a + 1:]:
            Ci, Cj = conn.potential(i), conn.potential(j)
            val = frame_derivative(model, i, Cj) - frame_derivative(model, j, Ci) + Ci.commutator(Cj)
            F[(i, j)] = val
            F[(j, i)] = -val
    return F


@dataclass
class CurvatureReport:
    components: Dict[Tuple[FrameIndex, FrameIndex], PolyMatrix]
    # F^(ee') (E-symmetric part) and F^[ee']_(alpha beta) (E-skew, symmetric in alpha beta).
    symmetric_part: Dict[Tuple[int, int], PolyMatrix]
    skew_part: Dict[Tuple[int, int, int, int], PolyMatrix]
    half_flat: bool


def curvature(conn: ConnectionOnM) -> CurvatureReport:
    """Curvature and its unique split F(e a, e' b) = eps_ab F^(ee') + F^[ee']_ab (spin 1/2)."""
    model = conn.model
    if model.spin_m != 1:
        raise ValueError("curvature split is for spin 1/2; use spin3.decompose_curvature")
    F = curvature_components(conn)
    p = model.rank_E
    half = Q(1, 2)
    sym, skew = {}, {}
    for e in range(1, p + 1):
        for f in range(1, p + 1):
            sym[(e, f)] = (F[((e, (1,)), (f, (2,)))] - F[((e, (2,)), (f, (1,)))]).scale(half)
            for al in (1, 2):
                for be in (1, 2):
                    skew[(e, f, al, be)] = (F[((e, (al,)), (f, (be,)))] + F[((e, (be,)), (f, (al,)))]).scale(half)
    # Reassembly of the split is an identity; assert it anyway.
    eps = {(1, 2): 1, (2, 1): -1}
    for e in range(1, p + 1):
        for f in range(1, p + 1):
            for al in (1, 2):
                for be in (1, 2):
                    rebuilt = skew[(e, f, al, be)] + sym[(e, f)].scale(eps.get((al, be), 0))
                    if not rebuilt == F[((e, (al,)), (f, (be,)))]:
                        raise AssertionError("curvature split does not reassemble")
    half_flat = all(v.is_zero() for v in skew.values())
    return CurvatureReport(F, sym, skew, half_flat)


def metric_for(model: HarmonicModel, omega_E) -> List[List[object]]:
    """g = omega_E (x) omega_H^m on the base frame ordering."""
    p = model.rank_E
    omega_E = linalg.as_matrix(omega_E)
    if len(omega_E) != p or any(len(r) != p for r in omega_E):
        raise ValueError(f"omega_E must be {p}x{p}")
    if any(omega_E[i][j] != -omega_E[j][i] for i in range(p) for j in range(p)):
        raise ValueError("omega_E must be antisymmetric")
    if linalg.det(omega_E) == 0:
        raise ValueError("omega_E must be nondegenerate")
    return linalg.kron(omega_E, omega_h_power(model.spin_m))


def ym_residual(conn: ConnectionOnM, omega_E) -> Dict[Tuple[int, ...], PolyMatrix]:
    """d^nabla * F as an (n-1)-form; keys are increasing frame positions, zero components omitted.

    The Hodge star uses unit volume normalization: a constant factor that
    does not affect whether the residual vanishes.
    """
    model = conn.model
    g = metric_for(model, omega_E)
    n = len(g)
    space = MetricSpace(n, tuple(tuple(r) for r in g), volume="complex", vol_scale=Q(1))
    order = model.frame_order
    F = curvature_components(conn)
    table = space.hodge_table(2)
    star: Dict[Tuple[int, ...], PolyMatrix] = {}
    for (i, j), images in table.items():
        Fij = F[(order[i], order[j])]
        if Fij.is_zero():
            continue
        for K, c in images.items():
            term = Fij.scale(c)
            star[K] = star[K] + term if K in star else term
    out: Dict[Tuple[int, ...], PolyMatrix] = {}
    C = conn.ordered()
    for K, Psi in star.items():
        for i in range(n):
            if i in K:
                continue
            val = frame_derivative(model, order[i], Psi) + C[i].commutator(Psi)
            if val.is_zero():
                continue
            key = tuple(sorted((i,) + K))
            val = val.scale(perm_sign((i,) + K))
            out[key] = out[key] + val if key in out else val
    return {k: v for k, v in out.items() if not v.is_zero()}


@dataclass
class AuditReport:
    residuals: Dict[str, PolyMatrix]
    symmetry: Dict[str, PolyMatrix]
    completion: Dict[str, PolyMatrix]

    @property
    def almost_half_flat(self) -> bool:
        return all(v.is_zero() for v in self.residuals.values())

    @property
    def symmetric(self) -> bool:
        return all(v.is_zero() for v in self.symmetry.values())

    @property
    def half_flat(self) -> bool:
        return self.almost_half_flat and all(v.is_zero() for v in self.completion.values())


def frame_curvature(model: HarmonicModel, A: Dict[str, PolyMatrix], a: str, b: str) -> PolyMatrix:
    """F(P, Q) = P A(Q) - Q A(P) + [A(P), A(Q)] - A([P, Q]) for named operators on the harmonic space."""
    ops = model.named_operators()
    zero = PolyMatrix.zero(model.vt, model.gauge_rank)
    Aa, Ab = A.get(a, zero), A.get(b, zero)
    out = ops[a].apply(Ab) - ops[b].apply(Aa) + Aa.commutator(Ab)
    for c, name in model.bracket_table()[(a, b)]:
        if name in A:
            out = out - A[name].scale(c)
    return out


def analytic_frame_connection(model: HarmonicModel, pots: AnalyticFramePotentials) -> Dict[str, PolyMatrix]:
    A = {"d++": pots.A_pp, "d--": pots.A_mm}
    for e, Am in enumerate(pots.A_Xminus, start=1):
        A[f"X-[{e}]"] = Am
    return A


def almost_half_flat_audit(model: HarmonicModel, pots: AnalyticFramePotentials) -> AuditReport:
    """Every curvature component constrained by almost half-flatness, the X+/X- symmetry, and F(d--, X-)."""
    A = analytic_frame_connection(model, pots)
    ops = list(model.named_operators())
    p = model.rank_E
    res: Dict[str, PolyMatrix] = {}
    for a in ops:
        for b in ("d0", "d++"):
            if a != b:
                res[f"F({b}, {a})"] = frame_curvature(model, A, b, a)
    for e in range(1, p + 1):
        for v in ("d--",):
            res[f"F(X+[{e}], {v})"] = frame_curvature(model, A, f"X+[{e}]", v)
        for f in range(e + 1, p + 1):
            res[f"F(X+[{e}], X+[{f}])"] = frame_curvature(model, A, f"X+[{e}]", f"X+[{f}]")
    sym = {}
    for e in range(1, p + 1):
        for f in range(e + 1, p + 1):
            sym[f"F(X+[{e}], X-[{f}]) - F(X+[{f}], X-[{e}])"] = frame_curvature(
                model, A, f"X+[{e}]", f"X-[{f}]"
            ) - frame_curvature(model, A, f"X+[{f}]", f"X-[{e}]")
    comp = {f"F(d--, X-[{e}])": frame_curvature(model, A, "d--", f"X-[{e}]") for e in range(1, p + 1)}
    return AuditReport(res, sym, comp)


@dataclass
class HalfFlatResult:
    model: HarmonicModel
    A_pp: PolyMatrix
    phi: PhiResult
    potentials: AnalyticFramePotentials
    central: CentralPotentials
    connection: ConnectionOnM
    curvature: CurvatureReport
    audit: AuditReport
    ym: Optional[Dict[Tuple[int, ...], PolyMatrix]] = None
    notes: List[str] = field(default_factory=list)

    @property
    def verdicts(self) -> Dict[str, object]:
        return {
            "almost_half_flat": self.audit.almost_half_flat and self.audit.symmetric,
            "half_flat": self.curvature.half_flat and self.audit.half_flat,
            "linC_remainder_zero": True,
            "ym_zero": None if self.ym is None else not self.ym,
        }


def build_half_flat(A_pp: PolyMatrix, model: HarmonicModel, omega_E=None) -> HalfFlatResult:
    """Run the full spin-1/2 pipeline; raises PipelineError naming the first failed invariant."""
    if model.spin_m != 1:
        raise ValueError("build_half_flat needs a spin-1/2 model")
    phi = solve_phi(A_pp, model)
    pots = analytic_potentials(A_pp, phi.Phi, model)
    central = central_frame(model, pots, phi.Phi)
    conn = extract_C(model, central)
    curv = curvature(conn)
    audit = almost_half_flat_audit(model, pots)
    ym = None
    if omega_E is not None:
        ym = ym_residual(conn, omega_E)
    notes = ["the differential condition on the 4-form is not evaluated: constant forms are co-closed"]
    return HalfFlatResult(model, A_pp, phi, pots, central, conn, curv, audit, ym, notes)


@dataclass
class CovarianceResult:
    gauge: PolyMatrix
    u_independent: bool
    transforms: bool


def gauge_covariance(model: HarmonicModel, A_pp: PolyMatrix, U: PolyMatrix) -> CovarianceResult:
    """Transform A++ by an analytic gauge U and relate the two base connections.

    A'++ = U^-1 A++ U + U^-1 d++ U. The central frames differ by
    g = Phi^-1 U Phi', which must be u-independent, and C'_i = g^-1 C_i g + g^-1 d_i g.
    """
    rep = analytic_check(U, model, "halfflat", 0)
    if not rep.ok:
        raise PipelineError("gauge rotation is not analytic of charge 0", ", ".join(rep.failed()))
    Uinv = invert(U)
    A2 = Uinv @ A_pp @ U + Uinv @ model.dpp.apply(U)
    r1 = build_half_flat(A_pp, model)
    r2 = build_half_flat(A2, model)
    g = r1.potentials.Phi_inv @ U @ r2.phi.Phi
    u_free = not any(p.depends_on_u() for p in g.entries())
    ginv = invert(g)
    ok = u_free
    if ok:
        for key in model.frame_order:
            lhs = r2.connection.potential(key)
            rhs = ginv @ r1.connection.potential(key) @ g + ginv @ frame_derivative(model, key, g)
            if not lhs == rhs:
                ok = False
                break
    return CovarianceResult(g, u_free, ok)
