import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eigensens import _backend

py = _backend.python_kernels
cy = _backend.compiled_kernels
needs_ext = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def _instance(seed, n=40, d=3, m=25):
    rng = np.random.default_rng(seed)
    return rng.random((n, d)), rng.uniform(0.02, 0.4, d), rng.uniform(-0.2, 1.3, (m, d))


@needs_ext
@pytest.mark.parametrize("seed", range(5))
def test_cdf_backends_agree(seed):
    s, h, p = _instance(seed)
    np.testing.assert_allclose(np.asarray(cy.kde_cdf(s, h, p)), py.kde_cdf(s, h, p), rtol=0, atol=1e-13)


@needs_ext
@pytest.mark.parametrize("seed", range(5))
def test_pdf_backends_agree(seed):
    s, h, p = _instance(seed)
    a, b = np.asarray(cy.kde_pdf(s, h, p)), py.kde_pdf(s, h, p)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)


@needs_ext
@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 4), bins=st.integers(2, 6), n=st.integers(1, 30), seed=st.integers(0, 2**31))
def test_product_accumulate_agrees(d, bins, n, seed):
    inc = np.random.default_rng(seed).dirichlet(np.ones(bins), size=(d, n))
    lo = n // 3
    a = np.asarray(cy.product_accumulate(inc, lo, n))
    b = np.asarray(py.product_accumulate(inc, lo, n))
    assert a.shape == (bins**d,)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-14)


@needs_ext
@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 4), bins=st.integers(2, 6), seed=st.integers(0, 2**31))
def test_reference_subtract_agrees(d, bins, seed):
    cells = np.random.default_rng(seed).random((bins,) * d)
    corner = cells
    for ax in range(d):
        corner = np.cumsum(corner, axis=ax)
    flat = np.ascontiguousarray(corner.ravel())
    a = np.asarray(cy.reference_subtract(flat, bins, d))
    b = np.asarray(py.reference_subtract(flat, bins, d))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-10)
    np.testing.assert_allclose(b.reshape(cells.shape), cells, rtol=0, atol=1e-10)


def test_product_accumulate_is_outer_product_sum():
    inc = np.random.default_rng(1).random((2, 5, 3))
    expected = sum(np.outer(inc[0, i], inc[1, i]) for i in range(5)).ravel()
    np.testing.assert_allclose(py.product_accumulate(inc, 0, 5), expected, atol=1e-15)


def _backend_in_subprocess(value):
    env = dict(os.environ)
    env.pop("EIGENSENS_BACKEND", None)
    if value is not None:
        env["EIGENSENS_BACKEND"] = value
    out = subprocess.run([sys.executable, "-c", "import eigensens; print(eigensens.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_forces_python_backend():
    assert _backend_in_subprocess("python") == "python"


def test_default_backend_prefers_extension():
    assert _backend_in_subprocess(None) == ("cython" if cy is not None else "python")
