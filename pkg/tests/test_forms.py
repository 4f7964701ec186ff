import random
from itertools import product
from math import comb

import pytest
from hypothesis import given, strategies as st

from grassmann_gauge import linalg
from grassmann_gauge.exterior import Form, b_omega_matrix, hodge, spectrum, wedge
from grassmann_gauge.forms import (
    OctonionAlgebra,
    QuaternionTriple,
    TorsionTensor,
    admissibility_projector,
    embed_e_lambda2_s3,
    g2_forms,
    hyperkaehler_form,
    kaehler_form,
    kaehler_form_sq,
    kostant_form,
    omega_h_power,
    quaternionic_form,
    rotation_from_quaternion,
    so_basis,
    spin7_form,
    spin_m_eigenvalue,
    spin_m_form,
    spin_m_form_even,
    symmetric_two_form,
    u2_basis,
)
from grassmann_gauge.scalars import Q

EPS2 = [[0, 1], [-1, 0]]


def norm2(x):
    return sum(c * c for c in x)


def test_octonion_basis_composition():
    O = OctonionAlgebra()
    for a, b in product(range(8), repeat=2):
        x, y = O.unit(a), O.unit(b)
        assert norm2(O.mul(x, y)) == 1
    assert O.mul(O.unit(0), O.unit(5)) == O.unit(5)


@given(st.lists(st.integers(-3, 3), min_size=16, max_size=16))
def test_octonion_composition_random(v):
    O = OctonionAlgebra()
    x, y = v[:8], v[8:]
    assert norm2(O.mul(x, y)) == norm2(x) * norm2(y)


def test_g2_pair():
    phi, psi = g2_forms()
    assert len(phi.coeffs) == 7 and len(psi.coeffs) == 7
    assert hodge(phi) == psi
    # phi ^ psi is a positive multiple of vol: 7 |phi|^2 / 7
    assert wedge(phi, psi) == Form.volume(phi.space).scale(7)


def test_spin7_self_dual():
    Phi = spin7_form()
    assert hodge(Phi) == Phi
    assert len(Phi.coeffs) == 14


def test_quaternion_triple_relations():
    for m in (1, 2):
        assert QuaternionTriple.standard(m).check()
    with pytest.raises(ValueError):
        QuaternionTriple.standard(0)


@pytest.mark.parametrize("q", [(1, 1, 0, 0), (1, 2, 3, 4), (2, -1, 0, 3)])
def test_quaternionic_form_frame_independent(q):
    R = rotation_from_quaternion(q)
    assert linalg.matmul(R, linalg.transpose(R)) == linalg.identity(3)
    assert linalg.det(R) == 1
    base = QuaternionTriple.standard(2)
    rotated = base.rotated(R)
    assert rotated.check()
    assert quaternionic_form(2, rotated) == quaternionic_form(2, base)


def test_quaternionic_m1_is_multiple_of_vol():
    Om = quaternionic_form(1)
    assert set(Om.coeffs) == {(0, 1, 2, 3)}


def test_hyperkaehler_forms():
    assert hyperkaehler_form(1, 1, 1) == hyperkaehler_form(1, 2, 2)
    with pytest.raises(ValueError):
        hyperkaehler_form(1, 0, 1)


def test_kaehler_examples():
    assert kaehler_form_sq(2) == Form.volume(kaehler_form(2).space).scale(2)
    M = b_omega_matrix(kaehler_form_sq(3))
    assert sum(M[i][i] for i in range(len(M))) == 0
    with pytest.raises(ValueError):
        kaehler_form_sq(1)


def test_kostant_errors_and_so5():
    with pytest.raises(ValueError):
        kostant_form([])
    assert kostant_form(so_basis(5)).is_zero()
    with pytest.raises(ValueError):
        kostant_form([so_basis(3)[0], so_basis(3)[0]])


def test_kostant_u2_is_half_kaehler_square():
    w = kaehler_form(2)
    assert kostant_form(u2_basis()) == wedge(w, w).scale(Q(1, 2))


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_omega_h_power_closed_form(m):
    W = omega_h_power(m)
    for k, j in product(range(m + 1), repeat=2):
        expected = Q((-1) ** k, comb(m, k)) if j == m - k else Q(0)
        assert W[k][j] == expected
    assert linalg.transpose(W) == linalg.scale(W, Q((-1) ** m))


def test_spin_m_form_m1_is_volume():
    Om = spin_m_form(1, EPS2)
    assert set(Om.coeffs) == {(0, 1, 2, 3)}
    with pytest.raises(ValueError):
        spin_m_form(2, EPS2)
    with pytest.raises(ValueError):
        spin_m_form(1, [[1, 0], [0, 1]])


def test_spin_m_even_scaling():
    base = spin_m_form_even(2, [[1, 0], [0, 1]])
    scaled = spin_m_form_even(2, [[3, 0], [0, 3]])
    assert scaled.coeffs == base.scale(9).coeffs
    with pytest.raises(ValueError):
        spin_m_form_even(2, EPS2)


@pytest.mark.parametrize("m", [1, 3])
def test_spin_m_eigenvalue_matches_dense_spectrum(m):
    S = [[1, 0], [0, 1]]
    lam = spin_m_eigenvalue(m, EPS2, S)
    Om = spin_m_form(m, EPS2)
    values = [round(e.value, 9) for e in spectrum(b_omega_matrix(Om), exact=True)]
    assert lam in values
    assert spin_m_eigenvalue(m, EPS2, [[0, 0], [0, 0]]) == 0
    w = symmetric_two_form(S, m, Om.space)
    assert not w.is_zero()


def random_torsion(p, seed):
    rng = random.Random(seed)
    raw = {}
    for key in product(range(p), range(2), range(p), range(2), range(p), range(2)):
        if rng.random() < 0.3:
            raw[key] = Q(rng.randint(-3, 3))

    def f(c, g, a, al, b, be):
        return raw.get((c, g, a, al, b, be), Q(0)) - raw.get((c, g, b, be, a, al), Q(0))

    return TorsionTensor.from_function(p, f)


def test_torsion_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        TorsionTensor(2, {(0, 0, 0, 0, 1, 1): 1})


def test_admissibility_zero_and_symmetric_part():
    proj, ok = admissibility_projector(TorsionTensor(2))
    assert ok and proj.is_zero()
    # s symmetric in (a, b) times eps_{alpha beta} is the S^2 E (x) Lambda^2 H part.
    s = {(0, 0, 0, 1): 2, (0, 0, 1, 0): 2, (1, 1, 1, 1): -1, (1, 0, 0, 0): 5}
    T = TorsionTensor.from_function(2, lambda c, g, a, al, b, be: Q(s.get((c, g, a, b), 0) * EPS2[al][be]))
    assert not T.is_zero()
    assert admissibility_projector(T)[1]


@pytest.mark.parametrize("seed", range(5))
def test_admissibility_embed_round_trip(seed):
    rng = random.Random(seed)
    p = 3
    vals = {}
    for c in range(p):
        for a in range(p):
            for b in range(a + 1, p):
                for h in ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)):
                    vals[(c, a, b, h)] = Q(rng.randint(-4, 4))

    def R(c, a, b, h):
        if a == b:
            return Q(0)
        return vals[(c, a, b, h)] if a < b else -vals[(c, b, a, h)]

    T = embed_e_lambda2_s3(p, R)
    proj, ok = admissibility_projector(T)
    assert proj == T
    assert ok == T.is_zero()


@pytest.mark.parametrize("seed", range(5))
def test_admissibility_idempotent(seed):
    T = random_torsion(2, seed)
    proj, _ = admissibility_projector(T)
    again, _ = admissibility_projector(proj)
    assert again == proj
    with pytest.raises(ValueError):
        admissibility_projector(T, m=3)
