import random

import pytest

from grassmann_gauge.harmonic import analytic_check, build_model, verify_on_monomials
from grassmann_gauge.poly import Poly, PolyMatrix
from grassmann_gauge.scalars import Q

from oracles import derivation_oracle, evaluate_poly, harmonic_point

M1 = build_model(1, 2, gauge_rank=2)
M3 = build_model(3, 2, gauge_rank=2, max_degree=40)


def test_build_errors():
    with pytest.raises(ValueError):
        build_model(2, 1)
    with pytest.raises(ValueError):
        build_model(1, 0)


@pytest.mark.parametrize("model", [M1, M3], ids=["m1", "m3"])
def test_brackets_operator_level(model):
    assert model.verify_brackets() == []


@pytest.mark.parametrize("model", [M1, M3], ids=["m1", "m3"])
def test_brackets_on_monomials(model):
    assert verify_on_monomials(model, max_degree=4) == []


def test_bracket_check_detects_wrong_structure_constant():
    model = build_model(1, 1)
    table = model.expected_brackets()
    table[("d0", "X+[1]")] = [(Q(2), "X+[1]")]
    ops = model.named_operators()
    assert not ops["d0"].bracket(ops["X+[1]"]) == model.combination(table[("d0", "X+[1]")])


def test_x_fields_commute():
    ops = M3.named_operators()
    names = [n for n in ops if n.startswith("X")]
    for a in names:
        for b in names:
            assert ops[a].bracket(ops[b]) == ops["d0"].scale(0)


def test_spin_half_coordinates():
    for e in (1, 2):
        for a in (1, 2):
            assert M1.field("X+", e)(M1.coordinate("xplus", a)).is_zero()
            expected = Poly.const(M1.vt, 1 if a == e else 0)
            assert M1.field("X+", e)(M1.coordinate("xminus", a)) == expected


def test_spin_three_halves_coordinates():
    for e in (1, 2):
        for a in (1, 2):
            assert M3.field("X+", e)(M3.coordinate("xppm", a)).is_zero()
            assert M3.field("X+++", e)(M3.coordinate("xppm", a)).is_zero()
    with pytest.raises(KeyError):
        M3.coordinate("xplus", 1)
    with pytest.raises(KeyError):
        M1.coordinate("xplus", 3)


def test_fields_agree_with_chain_rule():
    rng = random.Random(7)
    f = M3.coordinate("xppm", 1) * M3.coordinate("xmmm", 2) + M3.x(1, (1, 1, 2))
    for name, D in M3.named_operators().items():
        pt = harmonic_point(rng, M3.vt)
        assert evaluate_poly(D(f), pt) == derivation_oracle(D, f, pt), name


def test_analytic_check_examples():
    good = PolyMatrix.scalar_times(M1.coordinate("xplus", 1) ** 2, [[0, 1], [0, 0]])
    assert analytic_check(good, M1, "halfflat", 2).ok
    flat = PolyMatrix.scalar_times(M1.x(1, 1), [[0, 1], [0, 0]])
    report = analytic_check(flat, M1, "halfflat", 2)
    # x^{11} has charge 0 and is also not annihilated by X^1_+.
    assert not report.ok and report.failed() == ["charge", "X+[1]"]
    one_p = PolyMatrix.scalar_times(M3.coordinate("xppm", 1) ** 2, [[0, 1], [0, 0]])
    assert analytic_check(one_p, M3, "1partial", 2).ok
    assert analytic_check(one_p, M3, "0partial", 2).ok
    mixed = PolyMatrix.scalar_times(M3.coordinate("xpmm", 1) * M3.u("+", 1) ** 3, [[0, 1], [0, 0]])
    assert analytic_check(mixed, M3, "0partial", 2).ok
    assert analytic_check(mixed, M3, "1partial", 2).failed() == ["X+[1]"]
    with pytest.raises(ValueError):
        analytic_check(good, M1, "0partial", 2)
    with pytest.raises(ValueError):
        analytic_check(good, M1, "bogus", 2)
