# Copyright 2021 Agnostiq Inc.
#
# This file is part of Covalent.
#
# Licensed under the Apache License 2.0 (the "License"). A copy of the
# License may be obtained with this software package or at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Use of this file is prohibited except in compliance with the License.
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Tests for the interval FFT and the two-regime coefficient enclosures"""

import mpmath
import numpy as np
import pytest
from scipy import signal

from covalent_sbwave.coeffs import CoeffGrid, NormParams, evaluate_u, full_symmetric
from covalent_sbwave.exceptions import ConstraintViolation
from covalent_sbwave.interval import ComplexInterval, Interval
from covalent_sbwave.rigorous_dft import (
    AnalyticityParams,
    NonlinearityVariant,
    aliasing_factor,
    check_decay_heuristic,
    compute_bfft,
    compute_C,
    dct_coefficients,
    dct_samples,
    enclose_b,
    estimate_decay_rate,
    f_geo,
    interval_fft_2d,
    mesh_points,
    mesh_samples,
    naive_interval_dft_2d,
    shifted_samples,
)


@pytest.fixture
def grid():
    rng = np.random.default_rng(11)
    return rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))


def test_fft_agrees_with_naive_transform(grid):
    fast = interval_fft_2d(ComplexInterval.coerce(grid))
    slow = naive_interval_dft_2d(ComplexInterval.coerce(grid))
    expected = np.fft.fft2(grid) / grid.size
    np.testing.assert_allclose(fast.mid, expected, atol=1e-13)
    np.testing.assert_allclose(slow.mid, expected, atol=1e-13)
    assert np.all(fast.re.width < 1e-12)
    # both enclose the same exact transform, so they must overlap
    assert np.all(np.maximum(fast.re.lo, slow.re.lo) <= np.minimum(fast.re.hi, slow.re.hi))


def test_inverse_of_forward_encloses_input(grid):
    roundtrip = interval_fft_2d(interval_fft_2d(ComplexInterval.coerce(grid)), "inverse")
    assert np.all(roundtrip.contains(grid))


@pytest.mark.parametrize("shape", [(1, 16), (2, 2), (4, 8), (8, 4), (16, 2), (16, 16)])
@pytest.mark.parametrize("direction", ["forward", "inverse"])
def test_fft_encloses_transforms_of_points_inside_wide_inputs(shape, direction):
    rng = np.random.default_rng(sum(shape))
    centre = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    radius = 10.0 ** rng.uniform(-12, -2, size=shape)
    wide = ComplexInterval(
        Interval(centre.real - radius, centre.real + radius),
        Interval(centre.imag - radius, centre.imag + radius),
    )
    fast = interval_fft_2d(wide, direction)
    slow = naive_interval_dft_2d(wide, direction)
    size = centre.size
    for _ in range(5):
        jitter = rng.uniform(-0.9, 0.9, size=shape) + 1j * rng.uniform(-0.9, 0.9, size=shape)
        inside = centre + radius * jitter
        if direction == "forward":
            exact = np.fft.fft2(inside) / size
        else:
            exact = np.fft.ifft2(inside) * size
        assert np.all(fast.contains(exact))
        assert np.all(slow.contains(exact))
    spread = 2.0 * radius.sum() / (size if direction == "forward" else 1.0)
    assert np.all(fast.re.width <= 2.0 * spread * (1 + 1e-9) + 1e-12)


def test_square_of_a_profile_is_its_aliased_convolution():
    rng = np.random.default_rng(17)
    dims = (2, 3)
    values = rng.integers(-3, 4, size=(dims[0] + 1, dims[1] + 1)).astype(float)
    full = full_symmetric(values)
    square = signal.convolve(full, full)
    offset = (2 * dims[0], 2 * dims[1])
    for n_fft in ((4, 4), (8, 8)):
        samples = mesh_samples(CoeffGrid(values), n_fft)
        transform = interval_fft_2d(ComplexInterval(samples.sqr()), "forward")
        period = (2 * n_fft[0], 2 * n_fft[1])
        for n1 in range(n_fft[0] + 1):
            for n2 in range(n_fft[1] + 1):
                expected = 0.0
                for j1 in range(-2, 3):
                    for j2 in range(-2, 3):
                        m1 = n1 + j1 * period[0] + offset[0]
                        m2 = n2 + j2 * period[1] + offset[1]
                        if 0 <= m1 < square.shape[0] and 0 <= m2 < square.shape[1]:
                            expected += square[m1, m2]
                assert transform.re[n1, n2].contains(expected), (n_fft, n1, n2)
                assert transform.im[n1, n2].contains(0.0)
        assert np.all(transform.re.width < 1e-8)


def test_mesh_that_resolves_the_square_has_no_alias_images():
    values = np.array([[1.0, -2.0], [3.0, 0.5]])
    full = full_symmetric(values)
    square = signal.convolve(full, full)
    samples = mesh_samples(CoeffGrid(values), (8, 8))
    transform = interval_fft_2d(ComplexInterval(samples.sqr()), "forward")
    assert np.all(transform.re[:3, :3].contains(square[2:, 2:]))
    assert np.all(transform.re[3:, :].contains(0.0))


def test_fft_of_delta_is_exactly_enclosed():
    delta = np.zeros((8, 4))
    delta[0, 0] = 1.0
    out = interval_fft_2d(ComplexInterval.coerce(delta))
    assert np.all(out.re.contains(1.0 / 32.0))
    assert np.all(out.im.contains(0.0))


def test_fft_needs_power_of_two():
    with pytest.raises(ValueError):
        interval_fft_2d(ComplexInterval.coerce(np.ones((6, 4))))
    with pytest.raises(ValueError):
        interval_fft_2d(ComplexInterval.coerce(np.ones((4, 4))), "sideways")


def test_mesh_samples_match_point_evaluation():
    rng = np.random.default_rng(2)
    a = CoeffGrid(rng.normal(size=(4, 3)) * 0.1)
    q = (0.5, 0.25)
    n_fft = (8, 8)
    samples = mesh_samples(a, n_fft)
    x1, x2 = mesh_points(n_fft, q)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    u = evaluate_u(a, q, X1, X2)
    assert samples.shape == (16, 16)
    assert np.all(samples.lo - 1e-12 <= u) and np.all(u <= samples.hi + 1e-12)


def test_interval_and_float_mesh_transforms_agree():
    rng = np.random.default_rng(4)
    a = CoeffGrid(rng.normal(size=(5, 4)) * 0.2)
    n_fft = (16, 8)
    bfft = compute_bfft(a, NonlinearityVariant.G, n_fft)
    samples = dct_samples(a.values, n_fft)
    expected = dct_coefficients(NonlinearityVariant.G.apply_float(samples), n_fft)
    np.testing.assert_allclose(bfft.mid, expected, atol=1e-13)


def test_dct_path_recovers_coefficients():
    rng = np.random.default_rng(6)
    values = rng.normal(size=(6, 5))
    n_fft = (16, 8)
    recovered = dct_coefficients(dct_samples(values, n_fft), n_fft)
    np.testing.assert_allclose(recovered[:6, :5], values, atol=1e-13)


def test_f_geo_matches_partial_sums():
    xi = (0.5, 0.25)
    dims = (2, 3)
    n1, n2 = np.meshgrid(np.arange(200), np.arange(200), indexing="ij")
    gamma = np.left_shift(1, (n1 != 0).astype(int) + (n2 != 0).astype(int))
    outside = (n1 > dims[0]) | (n2 > dims[1])
    expected = np.sum((gamma * xi[0] ** n1 * xi[1] ** n2)[outside])
    assert f_geo(xi, dims).mid == pytest.approx(expected, rel=1e-12)


def test_f_geo_rejects_ratio_at_one():
    with pytest.raises(ConstraintViolation) as err:
        f_geo((1.0, 0.5), (1, 1))
    assert err.value.constraint == "xi<1"


def test_aliasing_factor_closed_form():
    ap = AnalyticityParams((0.5, 0.25))
    xi = np.exp(-2 * 4 * 0.5), np.exp(-2 * 8 * 0.25)
    expected = (1 + xi[0]) * (1 + xi[1]) / ((1 - xi[0]) * (1 - xi[1])) - 1
    assert aliasing_factor(ap, (4, 8)).mid == pytest.approx(expected, rel=1e-12)


def test_weights_must_stay_below_nu_bar():
    ap = AnalyticityParams((0.1, 0.1))
    with pytest.raises(ConstraintViolation) as err:
        ap.weight_ratio(NormParams((1.2, 1.0)))
    assert err.value.constraint == "nu<nu_bar"
    ratio = ap.weight_ratio(NormParams((1.05, 1.0)))
    assert float(ratio[0].hi) < 1.0


def test_rho_bar_must_be_positive():
    with pytest.raises(ConstraintViolation):
        AnalyticityParams((0.0, 0.1))


def test_enclosure_of_zero_profile():
    ap = AnalyticityParams((0.5, 0.5))
    zero = CoeffGrid.zeros((2, 2))
    g = enclose_b(zero, ap, NonlinearityVariant.G, (4, 4), (16, 16))
    assert g.C_hat <= 1e-300
    assert np.all(g.enclosure().contains(0.0))
    gpp = enclose_b(zero, ap, NonlinearityVariant.GPP, (4, 4), (16, 16))
    assert gpp.enclosure()[0, 0].contains(1.0)
    assert np.all(gpp.enclosure()[1:, :].contains(0.0))


def test_enclosure_of_single_mode_contains_bessel_coefficients():
    # u = 2 eps cos(y1) gives e^u = I_0(2 eps) + 2 sum_k I_k(2 eps) cos(k y1)
    eps = 0.5
    a = CoeffGrid(np.array([[0.0], [eps]]))
    ap = AnalyticityParams((1.0, 1.0))
    enclosed = enclose_b(a, ap, NonlinearityVariant.GPP, (6, 2), (16, 4))
    table = enclosed.table((12, 3))
    for k in range(13):
        exact = float(mpmath.besseli(k, 2 * eps))
        assert table[k, 0].contains(exact), k
        assert table[k, 1].contains(0.0)
    assert enclosed.tail_bound(12, 0) >= float(mpmath.besseli(12, 2 * eps))

    g = enclose_b(a, ap, NonlinearityVariant.G, (6, 2), (16, 4))
    assert g.enclosure()[0, 0].contains(float(mpmath.besseli(0, 1.0) - 1))
    assert g.enclosure()[1, 0].contains(float(mpmath.besseli(1, 1.0) - eps))


def test_alias_box_must_fit_in_the_mesh():
    ap = AnalyticityParams((1.0, 1.0))
    with pytest.raises(ConstraintViolation):
        enclose_b(CoeffGrid.zeros((1, 1)), ap, NonlinearityVariant.G, (8, 2), (8, 4))


def test_coarse_mesh_warns_about_aliasing(mocker):
    app_log_mock = mocker.patch("covalent_sbwave.rigorous_dft.app_log")
    a = CoeffGrid(np.array([[0.0, 0.3], [0.3, 0.1]]))
    enclose_b(a, AnalyticityParams((0.09531, 0.09531)), NonlinearityVariant.G, (3, 3), (8, 8))
    app_log_mock.warning.assert_called_once()


def test_decay_rate_estimate():
    n1, n2 = np.meshgrid(np.arange(20), np.arange(12), indexing="ij")
    a = CoeffGrid(0.5**n1 * 0.25**n2)
    rates = estimate_decay_rate(a)
    assert rates[0] == pytest.approx(2.0, rel=1e-6)
    assert rates[1] == pytest.approx(4.0, rel=1e-6)
    ap = AnalyticityParams((0.5, 0.5))
    assert check_decay_heuristic(a, NormParams((1.0, 1.0)), ap)
    assert not check_decay_heuristic(a, NormParams((1.0, 1.0)), AnalyticityParams((2.0, 2.0)))


def shifted_profile(values, rho_bar, y1, y2):
    """``sum_m a_|m| exp(m.rho_bar) exp(i m.y)`` summed directly."""
    full = full_symmetric(values)
    n1, n2 = full.shape[0] // 2, full.shape[1] // 2
    total = np.zeros(np.broadcast(y1, y2).shape, dtype=complex)
    for m1 in range(-n1, n1 + 1):
        for m2 in range(-n2, n2 + 1):
            weight = full[m1 + n1, m2 + n2] * np.exp(m1 * rho_bar[0] + m2 * rho_bar[1])
            total += weight * np.exp(1j * (m1 * y1 + m2 * y2))
    return total


@pytest.mark.parametrize("cell", ["mean_value", "rectangle"])
def test_shifted_samples_cover_every_point_of_their_cell(cell):
    rng = np.random.default_rng(31)
    values = rng.normal(size=(4, 3)) * 0.3 ** np.add.outer(np.arange(4), np.arange(3))
    ap = AnalyticityParams((0.2, 0.1))
    n_fft = (8, 8)
    shifted = shifted_samples(CoeffGrid(values), ap, n_fft, cell=cell)
    k1, k2 = np.meshgrid(np.arange(16), np.arange(16), indexing="ij")
    for _ in range(20):
        delta = rng.uniform(0.0, 1.0, size=2) * np.pi / np.array(n_fft)
        y1 = np.pi * k1 / n_fft[0] + delta[0]
        y2 = np.pi * k2 / n_fft[1] + delta[1]
        assert np.all(shifted.contains(shifted_profile(values, ap.rho_bar, y1, y2)))
    corners = shifted_profile(values, ap.rho_bar, np.pi * k1 / n_fft[0], np.pi * k2 / n_fft[1])
    assert np.all(shifted.contains(corners))


def test_mean_value_cells_are_tighter_than_rectangles():
    n1, n2 = np.meshgrid(np.arange(6), np.arange(6), indexing="ij")
    values = 0.5 * 0.4 ** (n1 + n2) * np.cos(n1 + 2 * n2)
    a = CoeffGrid(values)
    ap = AnalyticityParams((0.09531, 0.09531))
    n_fft = (64, 64)
    rectangle = shifted_samples(a, ap, n_fft, cell="rectangle")
    mean_value = shifted_samples(a, ap, n_fft, cell="mean_value")
    for variant in NonlinearityVariant:
        loose = compute_C(a, ap, variant, n_fft, rectangle)
        tight = compute_C(a, ap, variant, n_fft, mean_value)
        assert tight <= loose
    assert np.mean(mean_value.re.width) < np.mean(rectangle.re.width)


def test_unknown_cell_enclosure():
    with pytest.raises(ConstraintViolation) as err:
        shifted_samples(CoeffGrid.unit((1, 1)), AnalyticityParams((0.1, 0.1)), (8, 8), "disk")
    assert err.value.constraint == "cell"


def test_coarse_cells_warn(mocker):
    app_log_mock = mocker.patch("covalent_sbwave.rigorous_dft.app_log")
    ap = AnalyticityParams((0.09531, 0.09531))
    shifted_samples(CoeffGrid.unit((2, 2)), ap, (32, 32))
    app_log_mock.warning.assert_not_called()
    shifted_samples(CoeffGrid.unit((6, 1)), ap, (8, 8))
    app_log_mock.warning.assert_called_once()
    assert "N_fft=(8, 8)" in app_log_mock.warning.call_args.args[0]
