import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigensens import kde
from eigensens.errors import DegenerateColumnError, DimensionMismatchError, ValidationError
from eigensens.kde import BandwidthSpec, KdeModel


def test_gaussian_kernel_values():
    assert kde.gaussian_kernel(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)
    assert kde.gaussian_kernel(1.3) == kde.gaussian_kernel(-1.3)
    assert kde.gaussian_kernel(10.0) < 1e-21


def test_normal_cdf_tails():
    assert kde.normal_cdf(0.0) == 0.5
    assert kde.normal_cdf(-30.0) > 0  # erfc keeps the far tail
    assert kde.normal_cdf(8.0) >= 1 - 1e-15


def test_pdf_single_peak(kernels):
    assert kde.pdf(KdeModel([[0.0], [0.0]], [1.0]), 0.0) == pytest.approx(0.3989422804014327, abs=1e-12)
    m2 = KdeModel([[0.0, 0.0], [0.0, 0.0]], [1.0, 1.0])
    assert kde.pdf(m2, [0.0, 0.0]) == pytest.approx(1 / (2 * math.pi), abs=1e-12)


def test_pdf_two_samples(kernels):
    m = KdeModel([[-1.0], [1.0]], [1.0])
    assert kde.pdf(m, 0.0) == pytest.approx(0.24197072451914337, abs=1e-12)


def test_dimension_mismatch():
    m = KdeModel(np.zeros((3, 2)) + [[0], [1], [2]], [1.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        kde.pdf(m, [0.0, 0.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        kde.cdf(m, [0.0])
    with pytest.raises(DimensionMismatchError):
        kde.empirical_cdf(m.samples, [1.0])


def test_model_validation():
    with pytest.raises(ValidationError):
        KdeModel([[0.0]], [1.0])
    with pytest.raises(ValidationError):
        KdeModel([[0.0], [1.0]], [0.0])
    with pytest.raises(DimensionMismatchError):
        KdeModel([[0.0], [1.0]], [1.0, 1.0])


def test_cdf_limits(kernels, rng):
    x = rng.random((40, 3))
    h = np.array([0.05, 0.1, 0.2])
    m = KdeModel(x, h)
    assert kde.cdf(m, x.max(axis=0) + 8 * h) >= 1 - 1e-12
    assert kde.cdf(m, x.min(axis=0) - 8 * h) <= 1e-12


def test_cdf_single_sample_center(kernels):
    for h in ([0.01, 0.01], [0.3, 2.0]):
        m = KdeModel([[0.5, 0.5], [0.5, 0.5]], h)
        assert kde.cdf(m, [0.5, 0.5]) == pytest.approx(0.25, abs=1e-15)


def test_cdf_factorizes_for_one_point(kernels, rng):
    centre = rng.random(3)
    h = np.array([0.1, 0.2, 0.3])
    m = KdeModel(np.vstack([centre, centre]), h)
    for _ in range(20):
        p = rng.normal(0.5, 0.4, size=3)
        expected = math.prod(0.5 * (1 + math.erf((p[k] - centre[k]) / h[k] / math.sqrt(2))) for k in range(3))
        assert kde.cdf(m, p) == pytest.approx(expected, abs=1e-15)


def test_pdf_integrates_to_one(kernels, rng):
    x = rng.normal(size=30)
    h = 0.3
    m = KdeModel(x[:, None], [h])
    grid = np.linspace(x.min() - 8 * h, x.max() + 8 * h, 10_000)
    vals = kde.pdf_batch(m, grid[:, None])
    assert np.trapezoid(vals, grid) == pytest.approx(1.0, abs=1e-4)


def test_cdf_derivative_is_pdf(kernels, rng):
    x = rng.normal(size=25)
    m = KdeModel(x[:, None], [0.4])
    pts = rng.uniform(x.min() - 1, x.max() + 1, size=100)
    step = 1e-5
    deriv = (kde.cdf_batch(m, (pts + step)[:, None]) - kde.cdf_batch(m, (pts - step)[:, None])) / (2 * step)
    np.testing.assert_allclose(deriv, kde.pdf_batch(m, pts[:, None]), atol=1e-4)


def test_cdf_monotone(kernels, rng):
    x = rng.random((30, 2))
    m = KdeModel(x, [0.1, 0.15])
    lo = rng.uniform(-0.5, 1.5, size=(1000, 2))
    hi = lo + rng.exponential(0.2, size=(1000, 2)) * rng.integers(0, 2, size=(1000, 2))
    assert np.all(kde.cdf_batch(m, hi) >= kde.cdf_batch(m, lo))


def test_row_permutation_invariance(kernels, rng):
    x = rng.random((60, 3))
    h = [0.1, 0.2, 0.05]
    pts = rng.random((50, 3))
    a, b = KdeModel(x, h), KdeModel(rng.permutation(x), h)
    np.testing.assert_allclose(kde.pdf_batch(a, pts), kde.pdf_batch(b, pts), atol=1e-12, rtol=0)
    np.testing.assert_allclose(kde.cdf_batch(a, pts), kde.cdf_batch(b, pts), atol=1e-12, rtol=0)


def test_batch_threads_identical(kernels, rng):
    m = KdeModel(rng.random((80, 2)), [0.1, 0.1])
    pts = rng.random((1000, 2))
    assert kde.cdf_batch(m, pts, threads=1).tobytes() == kde.cdf_batch(m, pts, threads=4).tobytes()


def test_empirical_cdf():
    x = np.array([0.1, 0.4, 0.9])
    assert kde.empirical_cdf(x, [0.5]) == pytest.approx(2 / 3)
    m = np.array([[0.2, 0.3], [0.5, 0.1]])
    assert kde.empirical_cdf(m, [0.1, 5.0]) == 0
    assert kde.empirical_cdf(m, [0.5, 0.3]) == 1
    np.testing.assert_array_equal(kde.empirical_cdf_batch(m, m), [0.5, 0.5])


def test_silverman_formula():
    # a sample with unit standard deviation, built exactly
    x = np.tile([-1.0, 1.0], 50)
    x = x / x.std(ddof=1)
    assert kde.silverman_bandwidth(x)[0] == pytest.approx(0.42168460634274996, abs=1e-12)


def test_silverman_model_dimensions():
    factor = kde.silverman_bandwidth(np.random.default_rng(0).random((12000, 5)))
    sigma = np.random.default_rng(0).random((12000, 5)).std(axis=0, ddof=1)
    np.testing.assert_allclose(factor / sigma, 0.33094316172615595, rtol=1e-12)
    assert 0.29 * 0.33094316172615595 == pytest.approx(0.0960, abs=1e-4)


def test_silverman_scales_with_column(rng):
    x = rng.random((50, 2))
    y = x * [3.0, 1.0]
    h, hy = kde.silverman_bandwidth(x), kde.silverman_bandwidth(y)
    assert hy[0] == pytest.approx(3 * h[0], rel=1e-14)
    assert hy[1] == h[1]


def test_silverman_degenerate_column_named():
    x = np.column_stack([np.arange(5.0), np.ones(5)])
    with pytest.raises(DegenerateColumnError, match="flat"):
        kde.silverman_bandwidth(x, names=["ok", "flat"])


def _objective_at(x, h):
    # independent oracle: direct double loop over the definition
    n = len(x)
    total = 0.0
    for xj in x:
        est = sum(0.5 * (1 + math.erf((xj - xi) / h / math.sqrt(2))) for xi in x) / n
        emp = sum(1 for xi in x if xi <= xj) / n
        total += (est - emp) ** 2
    return total / n


def test_cdf_ls_objective_matches_oracle(kernels, rng):
    x = rng.normal(size=40)
    assert kde.cdf_ls_objective(x, [0.3]) == pytest.approx(_objective_at(x, 0.3), abs=1e-14)


def test_cdf_ls_descends_and_respects_box(kernels, rng):
    x = rng.random((60, 2))
    start = kde.silverman_bandwidth(x)
    h = kde.cdf_ls_bandwidth(x, budget=60)
    assert np.all(h > 0)
    assert np.all(h >= start / 20 * (1 - 1e-12)) and np.all(h <= start * 20 * (1 + 1e-12))
    assert kde.cdf_ls_objective(x, h) <= kde.cdf_ls_objective(x, start)


def test_cdf_ls_beats_scaled_silverman(kernels):
    x = np.random.default_rng(123).standard_normal(200)
    hs = kde.silverman_bandwidth(x)[0]
    h = kde.cdf_ls_bandwidth(x, budget=80)[0]
    best = _objective_at(x, h)
    assert best <= _objective_at(x, 0.5 * hs)
    assert best <= _objective_at(x, 2.0 * hs)


def test_cdf_ls_budget_must_cover_dimensions(rng):
    with pytest.raises(ValidationError):
        kde.cdf_ls_bandwidth(rng.random((10, 3)), budget=2)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("silverman", BandwidthSpec("silverman")),
        ("cv-ls", BandwidthSpec("cdf-least-squares", 200)),
        ("cv-ls:50", BandwidthSpec("cdf-least-squares", 50)),
    ],
)
def test_bandwidth_spec_parse(text, expected):
    assert BandwidthSpec.parse(text) == expected


@pytest.mark.parametrize("text", ["scott", "cv-ls:x", "silverman:3", "cv-ls:0"])
def test_bandwidth_spec_rejects(text):
    with pytest.raises(ValidationError):
        BandwidthSpec.parse(text)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=20, unique=True),
       st.floats(0.05, 3.0), st.floats(-6, 6))
def test_cdf_in_unit_interval(xs, h, p):
    c = kde.cdf(KdeModel(np.array(xs)[:, None], [h]), p)
    assert 0.0 <= c <= 1.0
