import os
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from grassmann_gauge import _pykernels, kernels
from grassmann_gauge.poly import MASK, S_M1, S_M2, S_P1, S_P2, WIDTH
from grassmann_gauge.scalars import Q

ckernels = pytest.importorskip("grassmann_gauge._ckernels")

NVARS = 6
exps = st.lists(st.integers(0, 4), min_size=NVARS, max_size=NVARS)
term_dicts = st.dictionaries(
    exps.map(lambda e: sum(x << (i * WIDTH) for i, x in enumerate(e))),
    st.integers(-6, 6).filter(bool).map(Q),
    max_size=8,
)


@given(term_dicts, term_dicts)
def test_mul_agrees(a, b):
    assert ckernels.mul(a, b) == _pykernels.mul(a, b)


@given(term_dicts, term_dicts, st.integers(-3, 3).map(Q))
def test_add_scaled_agrees(a, b, c):
    assert ckernels.add_scaled(dict(a), b, c) == _pykernels.add_scaled(dict(a), b, c)


@given(term_dicts)
def test_reduce_det_agrees(a):
    args = (S_P1, S_M2, S_P2, S_M1, MASK)
    assert ckernels.reduce_det(a, *args) == _pykernels.reduce_det(a, *args)


@given(term_dicts, st.integers(0, NVARS - 1), st.integers(0, 3))
def test_derive_agrees(a, i, add):
    key = add << (((i + 1) % NVARS) * WIDTH)
    assert ckernels.derive(a, i * WIDTH, MASK, key) == _pykernels.derive(a, i * WIDTH, MASK, key)


@given(term_dicts)
def test_max_degree_agrees(a):
    assert ckernels.max_degree(a, NVARS, WIDTH, MASK) == _pykernels.max_degree(a, NVARS, WIDTH, MASK)


def test_backend_selection():
    assert kernels.BACKEND == "cython"
    env = dict(os.environ, GG_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from grassmann_gauge import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
