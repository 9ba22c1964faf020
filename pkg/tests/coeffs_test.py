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

"""Tests for coefficient grids, the weighted norm and convolutions"""

import numpy as np
import pytest

from covalent_sbwave.coeffs import (
    CoeffGrid,
    NormParams,
    convolve,
    evaluate_u,
    flat,
    flat_indices,
    gamma,
    norm_ell1_nu,
    outside_mask,
    reflect_sum,
)
from covalent_sbwave.exceptions import ConstraintViolation
from covalent_sbwave.interval import Interval


def brute_convolution(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``sum_{m in Z^2} a_{|m|} b_{|n-m|}`` by enumeration."""
    A1, A2 = a.shape[0] - 1, a.shape[1] - 1
    B1, B2 = b.shape[0] - 1, b.shape[1] - 1
    out = np.zeros((A1 + B1 + 1, A2 + B2 + 1))
    for n1 in range(out.shape[0]):
        for n2 in range(out.shape[1]):
            total = 0.0
            for m1 in range(-A1, A1 + 1):
                for m2 in range(-A2, A2 + 1):
                    k1, k2 = abs(n1 - m1), abs(n2 - m2)
                    if k1 <= B1 and k2 <= B2:
                        total += a[abs(m1), abs(m2)] * b[k1, k2]
            out[n1, n2] = total
    return out


@pytest.fixture
def grids():
    rng = np.random.default_rng(3)
    return CoeffGrid(rng.normal(size=(3, 4))), CoeffGrid(rng.normal(size=(4, 2)))


def test_gamma():
    assert gamma(0, 0) == 1
    assert gamma(3, 0) == 2
    assert gamma(0, 5) == 2
    assert gamma(1, 1) == 4


def test_flat_layout_has_n2_fastest():
    n1, n2 = flat_indices((2, 3))
    assert list(n1[:5]) == [0, 0, 0, 0, 1]
    assert list(n2[:5]) == [0, 1, 2, 3, 0]
    assert flat(1, 2, (3, 4)) == 7


def test_outside_mask():
    mask = outside_mask((3, 3), (1, 2))
    assert mask.sum() == 16 - 6
    assert not mask[1, 2]
    assert mask[2, 0]
    assert mask[0, 3]


def test_norm_of_unit_vector():
    w = NormParams((1.5, 2.0))
    result = norm_ell1_nu(CoeffGrid.unit((2, 1)), w)
    assert result.contains(18.0)
    assert float(result.hi) - float(result.lo) < 1e-13


def test_norm_weights_must_be_at_least_one():
    with pytest.raises(ConstraintViolation) as err:
        NormParams((0.9, 1.0))
    assert err.value.constraint == "nu>=1"


def test_float_convolution_matches_enumeration(grids):
    a, b = grids
    result = convolve(a, b)
    assert result.dims == (a.dims[0] + b.dims[0], a.dims[1] + b.dims[1])
    np.testing.assert_allclose(result.values, brute_convolution(a.values, b.values), atol=1e-12)


def test_interval_convolution_encloses():
    # integer entries keep the enumeration exact
    rng = np.random.default_rng(5)
    a = CoeffGrid(rng.integers(-5, 6, size=(3, 4)).astype(float))
    b = CoeffGrid(rng.integers(-5, 6, size=(4, 2)).astype(float))
    result = convolve(CoeffGrid(a.as_interval()), b)
    assert result.is_interval
    assert np.all(result.values.contains(brute_convolution(a.values, b.values)))


def test_convolution_with_unit_at_origin(grids):
    a, _ = grids
    result = convolve(a, CoeffGrid.unit((0, 0)))
    np.testing.assert_allclose(result.values, a.values, atol=1e-15)


def test_reflect_sum_counts_the_full_box():
    ones = reflect_sum(lambda k1, k2: np.ones(np.shape(k1)), (2, 3))
    assert ones == pytest.approx(5 * 7)
    enclosed = reflect_sum(lambda k1, k2: Interval(np.ones(np.shape(k1))), (2, 3))
    assert enclosed.contains(35.0)


def test_evaluate_u_single_mode():
    q = (0.5, 0.25)
    x1 = np.linspace(-3.0, 3.0, 7)
    u = evaluate_u(CoeffGrid.unit((1, 0)), q, x1, 0.0)
    np.testing.assert_allclose(u, 2.0 * np.cos(q[0] * x1))
    u = evaluate_u(CoeffGrid.unit((1, 2)), q, 1.0, 2.0)
    assert u == pytest.approx(4.0 * np.cos(0.5) * np.cos(1.0))


def test_lookup_reflects_and_pads(grids):
    a, _ = grids
    assert a.lookup(-1, -2) == a.values[1, 2]
    assert a.lookup(a.dims[0] + 1, 0) == 0.0
    picked = CoeffGrid(a.as_interval()).lookup(np.array([-2, 9]), np.array([1, 0]))
    assert float(picked.lo[0]) == a.values[2, 1]
    assert float(picked.hi[1]) == 0.0


def test_resize_and_support():
    grid = CoeffGrid.unit((1, 2), (3, 4))
    assert grid.support_dims() == (1, 2)
    assert grid.resized((1, 2)).values[1, 2] == 1.0
    assert grid.resized((5, 5)).dims == (5, 5)
    assert CoeffGrid.zeros((2, 2)).support_dims() == (0, 0)


def test_grids_are_read_only(grids):
    a, _ = grids
    with pytest.raises(ValueError):
        a.values[0, 0] = 1.0
    with pytest.raises(ValueError):
        CoeffGrid(np.zeros(3))


def test_banach_algebra_on_random_pairs():
    rng = np.random.default_rng(23)
    for _ in range(1000):
        dims_a = tuple(rng.integers(0, 4, size=2))
        dims_b = tuple(rng.integers(0, 4, size=2))
        a = CoeffGrid(rng.normal(size=(dims_a[0] + 1, dims_a[1] + 1)))
        b = CoeffGrid(rng.uniform(-1, 1, size=(dims_b[0] + 1, dims_b[1] + 1)))
        w = NormParams(tuple(rng.uniform(1.0, 1.3, size=2)))
        product = float(norm_ell1_nu(convolve(a, b), w).lo)
        bound = float((norm_ell1_nu(a, w) * norm_ell1_nu(b, w)).hi)
        assert product <= bound * (1 + 1e-12)
