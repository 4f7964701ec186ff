import random

import pytest

from grassmann_gauge import linalg
from grassmann_gauge.gauge import ConnectionOnM, PipelineError
from grassmann_gauge.harmonic import build_model
from grassmann_gauge.parser import elaborate_text
from grassmann_gauge.poly import PolyMatrix
from grassmann_gauge.scalars import Q
from grassmann_gauge.spin3 import (
    PIECE_RANK,
    build_partial,
    decompose_curvature,
    decomposition_maps,
    factor_table,
)
from grassmann_gauge.verify import EPS2, NILP2

MODEL = build_model(3, 2, 2, max_degree=40)


def test_decomposition_is_invertible():
    assert sum(PIECE_RANK[k] + 1 for k in range(4)) == 16
    R, Rinv = decomposition_maps()
    assert linalg.matmul(R, Rinv) == linalg.identity(16)


@pytest.mark.parametrize("seed", range(3))
def test_factor_table_rows(seed):
    rng = random.Random(seed)
    samples = {k: [Q(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(PIECE_RANK[k] + 1)] for k in range(4)}
    rows = factor_table(MODEL, samples)
    assert len(rows) == 24
    assert [r.label for r in rows if not r.ok] == []


@pytest.mark.parametrize("text", ["xppm[1]^2*N", "xppp[1]*xpmm[2]*N", "xppp[2]*u[-,1]*N"])
def test_zero_partial_outputs(text):
    res = build_partial(elaborate_text(text, MODEL, NILP2), MODEL, "0partial", omega_E=EPS2)
    v = res.verdicts
    assert v["f0_zero"] and v["almost_partially_flat"] and v["zero_partially_flat"]


@pytest.mark.parametrize("text", ["xppm[1]^2*N", "xppm[1]*xppm[2]*N - 3*xppm[2]^2*N"])
def test_one_partial_outputs(text):
    res = build_partial(elaborate_text(text, MODEL, NILP2), MODEL, "1partial", omega_E=EPS2)
    v = res.verdicts
    assert v["one_partially_flat"] and v["f0_zero"] and v["f1_zero"] and v["f2_zero"]
    assert v["ym_zero"] is True
    assert not res.connection.potential((1, (1, 1, 1))).is_zero() or not res.connection.potential((1, (1, 1, 2))).is_zero()


def test_one_partial_vertical_curvature_rejection():
    # Analytic of charge 2 in the 1-partial sense, yet X+++ A-- does not vanish.
    A = elaborate_text("xppp[2]*u[-,1]*N", MODEL, NILP2)
    with pytest.raises(PipelineError) as info:
        build_partial(A, MODEL, "1partial")
    assert info.value.check == "almost 1-partially flat audit failed"
    assert "X+++[2]" in str(info.value)


@pytest.mark.parametrize(
    "text,mode,check",
    [
        ("xppm[1]*N", "1partial", "charge check failed: ∂₀A₊₊ ≠ 2A₊₊"),
        ("xpmm[1]*u[+,1]^3*N", "1partial", "analyticity check failed"),
        ("xmmm[1]*u[+,1]^5*N", "0partial", "analyticity check failed"),
    ],
)
def test_named_rejections(text, mode, check):
    with pytest.raises(PipelineError) as info:
        build_partial(elaborate_text(text, MODEL, NILP2), MODEL, mode)
    assert info.value.check == check


def test_mode_errors():
    A = elaborate_text("xppm[1]^2*N", MODEL, NILP2)
    with pytest.raises(ValueError):
        build_partial(A, MODEL, "halfflat")
    spin_half = build_model(1, 2, 2)
    with pytest.raises(ValueError):
        build_partial(elaborate_text("xplus[1]^2*N", spin_half, NILP2), spin_half, "0partial")


def test_decompose_generic_abelian_connection():
    model = build_model(3, 2, 1, verify=False)
    rng = random.Random(3)
    pots = {}
    for key in model.frame_order:
        C = sum((model.x(*other).scale(rng.randint(-2, 2)) for other in model.frame_order), model.x(1, (1, 1, 1)).scale(0))
        pots[key] = PolyMatrix(model.vt, [[C]])
    report = decompose_curvature(ConnectionOnM(model, pots))
    assert not report.zero_partial
    assert not all(report.piece_zero(k) for k in range(4))
