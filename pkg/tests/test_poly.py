import random

import pytest
from hypothesis import given, strategies as st

from grassmann_gauge.harmonic import build_model
from grassmann_gauge.poly import (
    DegreeBoundError,
    Derivation,
    Poly,
    PolyMatrix,
    VarTable,
    charge_of,
    invert,
    solve_raising,
)
from grassmann_gauge.scalars import Q

from oracles import derivation_oracle, evaluate_poly, harmonic_point

VT = VarTable(["a", "b"], max_degree=64)
VT_T = VarTable(["a", "b"], {"t": 3})
NAMES = VT.names


@st.composite
def polys(draw, vt=VT, max_terms=5, max_exp=3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = [draw(st.integers(0, max_exp)) for _ in vt.names]
        terms[vt.from_exponents(exps)] = Q(draw(st.integers(-5, 5)))
    return Poly(vt, terms)


@given(polys(), polys(), polys())
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == Poly.zero(VT)


@given(polys(), polys(), st.integers(0, 2 ** 32))
def test_evaluation_is_a_ring_map(a, b, seed):
    pt = harmonic_point(random.Random(seed), VT)
    assert evaluate_poly(a * b, pt) == evaluate_poly(a, pt) * evaluate_poly(b, pt)
    assert evaluate_poly(a + b, pt) == evaluate_poly(a, pt) + evaluate_poly(b, pt)


@given(polys())
def test_terms_are_reduced(a):
    p1, m2 = VT.index["u[+,1]"], VT.index["u[-,2]"]
    assert all(not (VT.exponents(k)[p1] and VT.exponents(k)[m2]) for k in a.terms)


def test_det_relation():
    u = {n: Poly.var(VT, n) for n in NAMES[:4]}
    det = u["u[+,1]"] * u["u[-,2]"] - u["u[+,2]"] * u["u[-,1]"]
    assert det == Poly.const(VT, 1)


def test_series_truncation():
    t = Poly.var(VT_T, "t")
    assert (t ** 3).is_zero() is False
    assert (t ** 4).is_zero()
    a = Poly.var(VT_T, "a")
    p = (1 + t * a) ** 6
    assert max(VT_T.exponents(k)[VT_T.index["t"]] for k in p.terms) == 3
    assert p.substitute_param("t", 0) == Poly.const(VT_T, 1)
    assert p.param_coefficient("t", 1) == a.scale(6)


def test_degree_bound():
    vt = VarTable(["a"], max_degree=5)
    a = Poly.var(vt, "a")
    assert (a ** 5).degree() == 5
    with pytest.raises(DegreeBoundError):
        a ** 6


def test_diff_rejects_harmonic_variables():
    with pytest.raises(ValueError):
        Poly.var(VT, "a").diff("u[+,1]")
    assert (Poly.var(VT, "a") ** 3).diff("a") == Poly.var(VT, "a") ** 2 * 3


def test_derivation_must_preserve_det():
    with pytest.raises(ValueError):
        Derivation(VT, {"u[+,1]": Poly.const(VT, 1)})


MODEL = build_model(1, 1, max_degree=64)


@given(polys(MODEL.vt), st.integers(0, 2 ** 32), st.sampled_from(["d0", "d++", "d--", "X+[1]", "X-[1]"]))
def test_derivations_match_chain_rule(p, seed, op):
    D = MODEL.named_operators()[op]
    pt = harmonic_point(random.Random(seed), MODEL.vt)
    assert evaluate_poly(D(p), pt) == derivation_oracle(D, p, pt)


@given(polys(MODEL.vt), polys(MODEL.vt))
def test_derivation_leibniz(a, b):
    D = MODEL.dpp
    assert D(a * b) == D(a) * b + a * D(b)


def test_charge_grading():
    u = MODEL.u
    mono = u("+", 2) ** 3 * u("-", 1)
    (k,) = mono.terms
    assert charge_of(k) == 2
    assert MODEL.d0(mono) == mono.scale(2)


@given(st.integers(0, 2 ** 32))
def test_solve_raising(seed):
    rng = random.Random(seed)
    vt = MODEL.vt
    # Random charge-0 polynomial g0, then g = d++ g0 has charge 2 and lies in the image of d++.
    g0 = Poly.zero(vt)
    for _ in range(3):
        e = [rng.randint(0, 2) for _ in range(4)]
        e[2] = e[0] + e[1] - e[3] if e[0] + e[1] >= e[3] else e[2]
        if e[0] + e[1] != e[2] + e[3]:
            continue
        g0 = g0 + Poly(vt, {vt.from_exponents(e + [rng.randint(0, 2), 0]): Q(rng.randint(-3, 3))})
    g = MODEL.dpp(g0)
    f = solve_raising(g)
    assert MODEL.dpp(f) == g
    assert MODEL.d0(f).is_zero()


def test_solve_raising_rejects_wrong_charge():
    with pytest.raises(ValueError):
        solve_raising(MODEL.u("+", 1))


def test_invert_unipotent_and_errors():
    vt = MODEL.vt
    x = Poly.var(vt, "x[1,1]")
    one, zero = Poly.const(vt, 1), Poly.zero(vt)
    M = PolyMatrix(vt, [[Poly.const(vt, 2), x], [zero, one]])
    inv = invert(M)
    assert M @ inv == PolyMatrix.identity(vt, 2)
    with pytest.raises(ValueError):
        invert(PolyMatrix(vt, [[x, zero], [zero, one]]))
    with pytest.raises(ValueError):
        invert(PolyMatrix(vt, [[one + x, zero], [zero, one]]))
