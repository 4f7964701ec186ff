from hypothesis import given, strategies as st

from grassmann_gauge import linalg
from grassmann_gauge.scalars import GaussQ, I, Q, exact_sqrt, format_scalar, from_text, inverse

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12).map(lambda f: Q(f.numerator, f.denominator))
gaussian = st.builds(GaussQ.make, rationals, rationals)


def test_gaussian_collapses_to_rational():
    assert GaussQ.make(3, 0) == Q(3)
    assert I * I == -1


@given(gaussian, gaussian)
def test_gaussian_field_laws(a, b):
    assert a * b == b * a
    assert (a + b) - b == a
    if a != 0:
        assert a * inverse(a) == 1


def test_exact_sqrt():
    assert exact_sqrt(Q(9, 4)) == Q(3, 2)
    assert exact_sqrt(Q(-4)) == 2 * I
    assert exact_sqrt(Q(2)) is None


@given(rationals)
def test_format_round_trip(x):
    assert from_text(format_scalar(x)) == x


square = st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(rationals, min_size=n, max_size=n), min_size=n, max_size=n))


@given(square)
def test_inverse_or_singular(a):
    if linalg.det(a) == 0:
        assert linalg.rank(a) < len(a)
        return
    assert linalg.matmul(a, linalg.inv(a)) == linalg.identity(len(a))


@given(square)
def test_nullspace_is_annihilated(a):
    null = linalg.nullspace(a)
    assert len(null) + linalg.rank(a) == len(a)
    for v in null:
        assert all(x == 0 for x in linalg.matvec(a, v))


def test_kron_shape_and_entries():
    k = linalg.kron([[1, 2], [3, 4]], [[0, 1], [1, 0]])
    assert k[0] == [0, 1, 0, 2] and k[3] == [3, 0, 4, 0]
