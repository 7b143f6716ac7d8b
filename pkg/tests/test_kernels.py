import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyerslab import _kernels_py, kernels
from hyerslab.errors import DegreeOverflow

BACKENDS = kernels.backends()


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def test_splitmix_reference_values():
    # published splitmix64 outputs for seed 0
    state, outs = 0, []
    for _ in range(3):
        state = (state + _kernels_py.GOLDEN) & _kernels_py.MASK64
        outs.append(_kernels_py._mix(state))
    assert outs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    u = _kernels_py.unit_uniforms(0, 1)
    assert u[0] == (0xE220A8397B1DCDAF >> 11) * 2.0**-53 * 2.0 - 1.0


def test_unit_uniforms_range():
    u = kernels.unit_uniforms(12345, 1000)
    assert u.shape == (1000,)
    assert np.all(u >= -1.0) and np.all(u < 1.0)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
@given(st.integers(0, 2**64 - 1), st.lists(st.integers(-(2**40), 2**40), min_size=0, max_size=20))
def test_hash_backends_agree(seed, keys):
    a = BACKENDS["python"].direction_hash(seed, np.array(keys, dtype=np.int64))
    b = BACKENDS["cython"].direction_hash(seed, np.array(keys, dtype=np.int64))
    assert int(a) == int(b)
    ua = BACKENDS["python"].unit_uniforms(int(a), 7)
    ub = BACKENDS["cython"].unit_uniforms(int(b), 7)
    assert np.array_equal(ua, ub)


def _dense_mul(da, ca, db, cb):
    out = {}
    for i, c1 in zip(da, ca):
        for j, c2 in zip(db, cb):
            out[int(i + j)] = out.get(int(i + j), 0) + c1 * c2
    return {k: v for k, v in out.items() if v != 0}


poly_terms = st.dictionaries(st.integers(0, 300).map(lambda k: 2 * k + 1),
                             st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                             min_size=0, max_size=8)


@given(poly_terms, poly_terms)
def test_poly_mul_matches_convolution(a, b):
    da = np.array(sorted(a), dtype=np.int64)
    db = np.array(sorted(b), dtype=np.int64)
    ca = np.array([a[k] for k in sorted(a)], dtype=complex)
    cb = np.array([b[k] for k in sorted(b)], dtype=complex)
    expect = _dense_mul(da, ca, db, cb)
    for name, impl in BACKENDS.items():
        d, c = impl.poly_mul(da, ca, db, cb, 10**6)
        assert list(d) == sorted(expect), name
        for k, v in zip(d, c):
            assert abs(v - expect[int(k)]) <= 1e-12 * (1 + abs(expect[int(k)])), name


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
@pytest.mark.parametrize("spread", [10, 10**9])
def test_poly_mul_backends_bit_identical(spread):
    rng = np.random.default_rng(5)
    da = np.unique(rng.integers(0, spread, 40) * 2 + 1)
    db = np.unique(rng.integers(0, spread, 30) * 2 + 1)
    ca = rng.normal(size=da.size) + 1j * rng.normal(size=da.size)
    cb = rng.normal(size=db.size) + 1j * rng.normal(size=db.size)
    d1, c1 = BACKENDS["python"].poly_mul(da, ca, db, cb, 10**6)
    d2, c2 = BACKENDS["cython"].poly_mul(da, ca, db, cb, 10**6)
    assert np.array_equal(d1, d2)
    assert c1.view(np.float64).tobytes() == c2.view(np.float64).tobytes()


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_poly_mul_term_cap(name):
    da = np.arange(1, 200, 2, dtype=np.int64)
    ca = np.ones(da.size, dtype=complex)
    db = np.arange(1, 2000, 200, dtype=np.int64)
    cb = np.ones(db.size, dtype=complex)
    with pytest.raises(DegreeOverflow):
        BACKENDS[name].poly_mul(da, ca, db, cb, 10)


def test_fallback_forced_by_env():
    env = dict(os.environ, HYERSLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import hyerslab.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
def test_reports_identical_across_backends(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"algebra": {"kind": "poly"}, "suite": "jensen", "samples": 5, '
                   '"probe": {"core": {"type": "poly_sign", "sigma": -1}, "perturbation": {"delta": 0.1}}}')
    out = {}
    for pure in ("0", "1"):
        env = dict(os.environ, HYERSLAB_PURE_PYTHON=pure)
        d = tmp_path / pure
        subprocess.run([sys.executable, "-m", "hyerslab", "run", "--config", str(cfg), "--out", str(d)],
                       env=env, capture_output=True, check=True)
        out[pure] = (d / "report.csv").read_bytes()
    assert out["0"] == out["1"]
