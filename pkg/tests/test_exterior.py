from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from grassmann_gauge import linalg
from grassmann_gauge.exterior import (
    Form,
    MetricSpace,
    b_omega_contract,
    b_omega_def,
    b_omega_matrix,
    form_from_vector,
    hodge,
    inner,
    spectrum,
    selfduality_check,
    wedge,
)
from grassmann_gauge.forms import g2_forms
from grassmann_gauge.scalars import Q

from oracles import b_omega_oracle, from_full, hodge_full, to_full, wedge_full

small_q = st.integers(-4, 4).map(Q)


def euclid(n):
    return MetricSpace.euclidean(n)


@st.composite
def spaces(draw, dims=(4, 5, 6, 7, 8), volume="real"):
    n = draw(st.sampled_from(dims))
    lorentz = draw(st.booleans())
    # Square entries keep sqrt|det g| rational.
    diag = [Q(draw(st.sampled_from([1, 4, 9]))) for _ in range(n)]
    if lorentz:
        diag[-1] = -diag[-1]
    return MetricSpace.diagonal(diag, orientation=draw(st.sampled_from([1, -1])), volume=volume)


@st.composite
def forms_on(draw, space, degree, max_terms=6):
    keys = list(combinations(range(space.dim), degree))
    chosen = draw(st.lists(st.sampled_from(keys), max_size=max_terms, unique=True))
    return Form(space, degree, {k: draw(small_q) for k in chosen})


@st.composite
def omega_pairs(draw, dims=(4, 5, 6, 7, 8)):
    # With the complex volume <vol, vol> = 1 in every signature, which the contraction formula assumes.
    sp = draw(spaces(dims, volume="complex"))
    return draw(forms_on(sp, 4)), draw(forms_on(sp, 2))


def test_wedge_basis_cases():
    sp = euclid(4)
    e = [Form.basis(sp, i) for i in range(4)]
    assert wedge(e[0], e[1]).coeffs == {(0, 1): 1}
    assert wedge(e[0], e[0]).is_zero()
    a, b = wedge(e[0], e[1]), wedge(e[2], e[3])
    assert wedge(a, b) == wedge(b, a) == Form.basis(sp, 0, 1, 2, 3)


def test_wedge_rejects_mismatched_spaces():
    with pytest.raises(ValueError):
        wedge(Form.basis(euclid(4), 0), Form.basis(euclid(5), 1))


@given(st.data())
def test_wedge_graded_commutative_and_associative(data):
    sp = euclid(6)
    p, q, r = data.draw(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)))
    a, b, c = (data.draw(forms_on(sp, d)) for d in (p, q, r))
    assert wedge(a, b) == wedge(b, a).scale((-1) ** (p * q))
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


@given(st.data())
def test_wedge_matches_full_tensor_oracle(data):
    sp = euclid(5)
    p, q = data.draw(st.tuples(st.integers(1, 3), st.integers(1, 2)))
    a, b = data.draw(forms_on(sp, p)), data.draw(forms_on(sp, q))
    assert wedge(a, b).coeffs == from_full(wedge_full(to_full(a), p, to_full(b), q, 5), p + q)


def test_hodge_examples():
    sp = euclid(4)
    assert hodge(Form.basis(sp, 0, 1)) == Form.basis(sp, 2, 3)
    for key in combinations(range(4), 2):
        w = Form.basis(sp, *key)
        assert hodge(hodge(w)) == w


def test_g2_psi_star_is_phi():
    phi, psi = g2_forms()
    assert hodge(phi) == psi
    assert hodge(psi) == phi


@given(st.data())
def test_hodge_defining_property(data):
    sp = data.draw(spaces((4, 5, 6)))
    p = data.draw(st.integers(0, sp.dim))
    a, beta = data.draw(forms_on(sp, p)), data.draw(forms_on(sp, p))
    assert wedge(beta, hodge(a)) == Form.volume(sp).scale(inner(beta, a))


@given(st.data())
def test_hodge_matches_levi_civita_oracle(data):
    sp = data.draw(spaces((4, 5, 6)))
    p = data.draw(st.integers(0, sp.dim))
    a = data.draw(forms_on(sp, p))
    ginv = [list(r) for r in sp.ginv]
    assert hodge(a).coeffs == from_full(hodge_full(to_full(a), p, sp.dim, ginv, sp.vol_scale), sp.dim - p)


@given(st.data())
def test_hodge_squared_sign(data):
    sp = data.draw(spaces())
    p = data.draw(st.integers(0, sp.dim))
    a = data.draw(forms_on(sp, p))
    sign = (-1) ** (p * (sp.dim - p)) * sp.signature_sign
    assert hodge(hodge(a)) == a.scale(sign)


def test_bvol_is_hodge_on_r4():
    sp = euclid(4)
    vol = Form.volume(sp)
    for key in combinations(range(4), 2):
        w = Form.basis(sp, *key)
        assert b_omega_def(vol, w) == hodge(w)
    assert b_omega_def(Form(sp, 4), Form.basis(sp, 0, 1)).is_zero()


def test_decomposable_contraction():
    sp = euclid(4)
    Omega, w = Form.basis(sp, 0, 1, 2, 3), Form.basis(sp, 0, 1)
    assert b_omega_contract(Omega, w) == b_omega_def(Omega, w)
    assert b_omega_contract(Omega, Form(sp, 2)).is_zero()


def test_contraction_degree_errors():
    sp = euclid(4)
    with pytest.raises(ValueError):
        b_omega_def(Form.basis(sp, 0, 1), Form.basis(sp, 0, 1))


@given(omega_pairs())
def test_def_equals_contract(pair):
    Omega, w = pair
    assert b_omega_def(Omega, w) == b_omega_contract(Omega, w)


@given(omega_pairs((4, 5, 6)))
def test_def_matches_full_tensor_route(pair):
    # Both sides use the space's own volume normalization.
    Omega, w = pair
    assert b_omega_def(Omega, w).coeffs == b_omega_oracle(Omega, w)


def test_def_matches_oracle_nondiagonal_metric():
    gram = ((2, 1, 0, 0, 0), (1, 3, 0, 1, 0), (0, 0, 1, 0, 0), (0, 1, 0, 2, 1), (0, 0, 0, 1, -1))
    sp = MetricSpace(5, gram, vol_scale=Q(1))
    Omega = Form(sp, 4, {(0, 1, 2, 3): Q(2), (1, 2, 3, 4): Q(-1), (0, 1, 3, 4): Q(3)})
    w = Form(sp, 2, {(0, 1): Q(1), (2, 4): Q(-2), (1, 3): Q(1, 2)})
    assert b_omega_def(Omega, w).coeffs == b_omega_oracle(Omega, w)


@given(st.data())
def test_b_matrix_self_adjoint_and_tracefree(data):
    sp = data.draw(spaces((4, 5, 6), volume="complex"))
    Omega = data.draw(forms_on(sp, 4))
    M = b_omega_matrix(Omega)
    G = sp.lambda_gram(2)
    # G is the Gram matrix of the form basis, so self-adjointness reads M^T G = G M.
    assert linalg.matmul(linalg.transpose(M), G) == linalg.matmul(G, M)
    assert sum(M[i][i] for i in range(len(M))) == 0


def test_b_matrix_zero_iff_omega_zero():
    sp = euclid(5)
    for key in combinations(range(5), 4):
        assert not linalg.is_zero(b_omega_matrix(Form.basis(sp, *key)))
    assert linalg.is_zero(b_omega_matrix(Form(sp, 4)))


def test_spectra_examples():
    assert [(e.value, e.multiplicity) for e in spectrum(linalg.identity(6))] == [(1.0, 6)]
    vol_spec = spectrum(b_omega_matrix(Form.volume(euclid(4))))
    assert [(round(e.value, 9), e.multiplicity) for e in vol_spec] == [(1.0, 3), (-1.0, 3)]
    _, psi = g2_forms()
    M = b_omega_matrix(psi)
    assert len(M) == 21 and sum(M[i][i] for i in range(21)) == 0
    assert sorted(e.multiplicity for e in spectrum(M)) == [7, 14]
    exact = spectrum(M, exact=True)
    assert all(e.exact for e in exact) and sorted(e.multiplicity for e in exact) == [7, 14]


def test_selfduality():
    sp = euclid(4)
    vol = Form.volume(sp)
    assert selfduality_check(vol, 1, {}).ok
    plus = form_from_vector(sp, 2, [1, 0, 0, 0, 0, 1])  # e01 + e23
    F = {k: [[c, 0], [0, 2 * c]] for k, c in plus.coeffs.items()}
    assert selfduality_check(vol, 1, F).ok
    assert not selfduality_check(vol, -1, F).ok
    with pytest.raises(ValueError):
        selfduality_check(vol, 0, F)
