import json
import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from grassmann_gauge.harmonic import build_model
from grassmann_gauge.parser import (
    BinOp,
    ConfigError,
    ElaborationError,
    Ident,
    ParseError,
    Pow,
    config_from_mapping,
    elaborate,
    elaborate_text,
    generates_nilpotent,
    load_config,
    parse,
    to_source,
)
from grassmann_gauge.poly import Poly, PolyMatrix
from grassmann_gauge.verify import ELABORATION_ERRORS, NILP2, PARSE_ERRORS, random_expression

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
MODEL = build_model(1, 2, 2, max_degree=64)
seeds = st.integers(0, 2 ** 32)

leaves = st.sampled_from(["0", "1", "3/2", "I", "x[1,1]", "x[2,2]", "u[+,1]", "u[-,2]", "xplus[1]", "xminus[2]"])
scalar_exprs = st.recursive(
    leaves,
    lambda sub: st.one_of(
        st.tuples(sub, st.sampled_from(["+", "-", "*"]), sub).map(lambda t: f"({t[0]}) {t[1]} ({t[2]})"),
        st.tuples(sub, st.integers(0, 2)).map(lambda t: f"({t[0]})^{t[1]}"),
    ),
    max_leaves=6,
)
# Matrix-typed expressions; scalars and matrices never meet under + or -.
MATS = dict(NILP2, Id=[[1, 0], [0, 1]])
matrix_exprs = st.tuples(scalar_exprs, st.sampled_from(["N", "Id"])).map(lambda t: f"({t[0]})*{t[1]}")


def test_parse_examples():
    ast = parse("xplus[1]^2 * N")
    assert isinstance(ast, BinOp) and ast.op == "*"
    assert isinstance(ast.left, Pow) and ast.left.exponent == 2
    assert isinstance(ast.left.base, Ident) and ast.left.base.name == "xplus"
    assert parse("(x[1,1] + 3/2) * u[+,2]")
    with pytest.raises(ParseError, match=r"unexpected end of input at 1:8"):
        parse("xplus[1")


@pytest.mark.parametrize("src,pos", PARSE_ERRORS)
def test_parse_error_positions(src, pos):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert (info.value.line, info.value.col) == pos


@pytest.mark.parametrize("src", ELABORATION_ERRORS)
def test_elaboration_errors(src):
    with pytest.raises((ElaborationError, ParseError)):
        elaborate_text(src, MODEL, NILP2)


def test_spin_specific_coordinates():
    with pytest.raises(ElaborationError, match="not valid for spin"):
        elaborate_text("xppm[1]*N", MODEL, NILP2)


def test_elaborate_examples():
    assert elaborate_text("0", MODEL, NILP2).is_zero()
    xp = MODEL.x(1, 1) * MODEL.u_lower("+", 1) + MODEL.x(1, 2) * MODEL.u_lower("+", 2)
    hand = PolyMatrix.scalar_times(xp * xp, NILP2["N"])
    assert elaborate_text("xplus[1]^2 * N", MODEL, NILP2) == hand
    assert elaborate_text("2", MODEL, NILP2) == PolyMatrix.identity(MODEL.vt, 2).scale(2)


@given(seeds)
def test_source_round_trip(seed):
    src = random_expression(random.Random(seed))
    ast = parse(src)
    assert parse(to_source(ast)) == ast


@given(matrix_exprs)
def test_printed_matrix_reparses(src):
    M = elaborate(parse(src), MODEL, MATS)
    assert elaborate_text(M.to_text(), MODEL, MATS) == M


@given(matrix_exprs, matrix_exprs)
def test_elaboration_is_additive_and_multiplicative(a, b):
    A, B = elaborate_text(a, MODEL, MATS), elaborate_text(b, MODEL, MATS)
    assert elaborate_text(f"({a}) + ({b})", MODEL, MATS) == A + B
    assert elaborate_text(f"({a}) - ({b})", MODEL, MATS) == A - B
    assert elaborate_text(f"({a}) * ({b})", MODEL, MATS) == A @ B


def test_series_parameter_needs_series_model():
    with pytest.raises(ElaborationError):
        elaborate_text("t*N", MODEL, NILP2)
    series = build_model(1, 2, 2, series_order=2)
    M = elaborate_text("t*N", series, NILP2)
    assert M.rows[0][1] == Poly.var(series.vt, "t")


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    cfg = load_config(path)
    assert cfg.spin in (1, 3)
    assert generates_nilpotent(cfg.matrices, cfg.gauge_rank)
    assert cfg.echo()["prepotential"] == cfg.prepotential


def test_json_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"spin": 1, "rank_E": 2, "gauge_rank": 2, "nilpotent_generators": [[[0, 1], [0, 0]]],
                             "prepotential": "xplus[1]^2*N"}))
    cfg = load_config(p)
    assert cfg.mode == "halfflat" and "N" in cfg.matrices


@pytest.mark.parametrize(
    "data",
    [
        {"spin": 2, "rank_E": 2, "gauge_rank": 2, "prepotential": "0"},
        {"spin": 1, "rank_E": 2, "prepotential": "0"},
        {"spin": 1, "rank_E": 0, "gauge_rank": 2, "prepotential": "0"},
        {"spin": 1, "rank_E": 2, "gauge_rank": 2, "prepotential": "0", "mode": "1partial"},
        {"spin": 1, "rank_E": 2, "gauge_rank": 3, "prepotential": "0", "nilpotent_generators": {"N": [[0, 1], [0, 0]]}},
        {"spin": 3, "rank_E": 2, "gauge_rank": 2, "prepotential": "0", "series_order": -1},
    ],
)
def test_config_errors(data):
    with pytest.raises(ConfigError):
        config_from_mapping(data)


def test_generates_nilpotent():
    assert generates_nilpotent({"N": [[0, 1], [0, 0]]}, 2)
    assert not generates_nilpotent({"M": [[0, 1], [1, 0]]}, 2)
    # Each generator nilpotent, but together they generate sl(2).
    assert not generates_nilpotent({"A": [[0, 1], [0, 0]], "B": [[0, 0], [1, 0]]}, 2)
