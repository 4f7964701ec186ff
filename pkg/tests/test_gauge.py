import random

import pytest

from grassmann_gauge.gauge import (
    ConnectionOnM,
    PipelineError,
    build_half_flat,
    curvature,
    gauge_covariance,
    solve_phi,
    ym_residual,
)
from grassmann_gauge.harmonic import build_model
from grassmann_gauge.parser import elaborate_text
from grassmann_gauge.poly import Poly, PolyMatrix
from grassmann_gauge.scalars import Q
from grassmann_gauge.verify import EPS2, NILP2, hand_connection, random_prepotential, worked_example

MODEL = build_model(1, 2, 2)
WITH_ID = dict(NILP2, Id=[[1, 0], [0, 1]])


@pytest.fixture(scope="module")
def worked():
    return worked_example()


def test_worked_phi_and_potentials(worked):
    model, A, res = worked
    N = PolyMatrix.constant(model.vt, NILP2["N"])
    xp, xm = model.coordinate("xplus", 1), model.coordinate("xminus", 1)
    assert res.phi.Phi == PolyMatrix.identity(model.vt, 2) - N.scale(xp * xm)
    assert res.phi.iterations == 1
    assert res.potentials.A_mm == N.scale(xm * xm)
    assert model.dpp.apply(res.phi.Phi) + A @ res.phi.Phi == PolyMatrix.zero(model.vt, 2)


def test_worked_connection_and_curvature(worked):
    model, _, res = worked
    N = PolyMatrix.constant(model.vt, NILP2["N"])
    conn = res.connection
    assert conn.potential((1, (1,))) == N.scale(model.x(1, 2))
    assert conn.potential((1, (2,))) == N.scale(-model.x(1, 1))
    assert conn.potential((2, (1,))).is_zero() and conn.potential((2, (2,))).is_zero()
    F = res.curvature.components
    assert F[((1, (1,)), (1, (2,)))] == N.scale(Q(-2))
    assert res.curvature.half_flat
    assert res.curvature.symmetric_part[(1, 1)] == N.scale(Q(-2))
    assert res.verdicts == {"almost_half_flat": True, "half_flat": True, "linC_remainder_zero": True, "ym_zero": True}


def test_phi_is_polynomial_in_the_nilpotent_generator():
    A = elaborate_text("xplus[1]*xplus[2]*N", MODEL, NILP2)
    phi = solve_phi(A, MODEL)
    delta = phi.Phi - PolyMatrix.identity(MODEL.vt, 2)
    assert not delta.is_zero()
    assert delta @ delta == PolyMatrix.zero(MODEL.vt, 2)


@pytest.mark.parametrize("seed", range(6))
def test_random_prepotentials_are_half_flat(seed):
    rng = random.Random(seed)
    r = rng.choice([2, 3])
    text, gens = random_prepotential(rng, r)
    model = build_model(1, 2, r, max_degree=40)
    res = build_half_flat(elaborate_text(text, model, gens), model, omega_E=EPS2)
    assert res.verdicts["half_flat"] and res.verdicts["almost_half_flat"]
    assert res.verdicts["ym_zero"]


def test_series_mode_matches_exact_mode():
    text = "xplus[1]^2*N1 + xplus[1]*xplus[2]*N2"
    gens = {"N1": [[0, 1, 0], [0, 0, 1], [0, 0, 0]], "N2": [[0, 0, 1], [0, 0, 0], [0, 0, 0]]}
    exact_model = build_model(1, 2, 3)
    series_model = build_model(1, 2, 3, series_order=3)
    exact = build_half_flat(elaborate_text(text, exact_model, gens), exact_model)
    series = build_half_flat(elaborate_text(f"t*({text})", series_model, gens), series_model)
    assert series.curvature.half_flat
    C_exact = exact.connection.potential((1, (1,))).to_text()
    C_series = series.connection.potential((1, (1,))).substitute_param("t", 1).to_text()
    assert C_exact == C_series


def test_gauge_covariance():
    A = elaborate_text("xplus[1]^2*N", MODEL, NILP2)
    U = elaborate_text("Id + xplus[2]*u[-,1]*N", MODEL, WITH_ID)
    res = gauge_covariance(MODEL, A, U)
    assert res.u_independent and res.transforms


def test_gauge_covariance_rejects_non_analytic_gauge():
    A = elaborate_text("xplus[1]^2*N", MODEL, NILP2)
    with pytest.raises(PipelineError):
        gauge_covariance(MODEL, A, elaborate_text("Id + xminus[1]*u[+,1]*N", MODEL, WITH_ID))


@pytest.mark.parametrize(
    "text,gens,check",
    [
        ("x[1,1]*N", NILP2, "charge check failed: ∂₀A₊₊ ≠ 2A₊₊"),
        ("x[1,1]*u[+,1]*u[+,2]*N", NILP2, "analyticity check failed"),
        ("xplus[1]^2*M", {"M": [[0, 1], [1, 0]]}, "non-nilpotent input in exact mode"),
    ],
)
def test_rejections_are_named(text, gens, check):
    with pytest.raises(PipelineError) as info:
        build_half_flat(elaborate_text(text, MODEL, gens), MODEL)
    assert info.value.check == check


def test_hand_connection_is_not_half_flat_nor_ym():
    conn = hand_connection()
    assert not curvature(conn).half_flat
    assert ym_residual(conn, EPS2)


def test_connection_must_be_u_free():
    vt = MODEL.vt
    with pytest.raises(PipelineError):
        ConnectionOnM(MODEL, {(1, (1,)): PolyMatrix(vt, [[Poly.var(vt, "u[+,1]"), Poly.zero(vt)], [Poly.zero(vt)] * 2])})


def test_ym_rejects_bad_metric(worked):
    _, _, res = worked
    with pytest.raises(ValueError):
        ym_residual(res.connection, [[1, 0], [0, 1]])
