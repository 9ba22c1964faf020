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

"""Tests for lambda, the Jacobian and the approximate inverse"""

import math

import numpy as np
import pytest

from covalent_sbwave.coeffs import CoeffGrid, NormParams, convolve, flat
from covalent_sbwave.exceptions import ConstraintViolation
from covalent_sbwave.interval import Interval
from covalent_sbwave.presets import get_preset
from covalent_sbwave.problem import (
    OperatorA,
    ProblemParams,
    TruncationSet,
    apply_A,
    assemble_DF,
    lambda_grid,
    lambda_min,
    lambda_n,
    norm_A,
    residual_grid,
)
from covalent_sbwave.rigorous_dft import AnalyticityParams, NonlinearityVariant, enclose_b

BOXES = {
    "n_gal": (60, 20),
    "n_jac": (30, 10),
    "n_alias": (120, 40),
    "n_fft": (256, 128),
    "n_col": (60, 20),
    "n_row": (160, 60),
    "n_tail": (40, 15),
}


@pytest.fixture
def params():
    return ProblemParams(1.3, (0.05, 0.1))


def float_lambda(n1, n2, params):
    t1 = (n1 * params.q[0]) ** 2
    t2 = (n2 * params.q[1]) ** 2
    return (t1 + t2) ** 2 - params.c**2 * t1 + 1


def test_problem_params_validation(mocker):
    with pytest.raises(ConstraintViolation) as err:
        ProblemParams(0.0, (0.1, 0.1))
    assert err.value.constraint == "c>0"
    with pytest.raises(ConstraintViolation) as err:
        ProblemParams(1.0, (0.1, -0.1))
    assert err.value.constraint == "q>0"

    app_log_mock = mocker.patch("covalent_sbwave.problem.app_log")
    ProblemParams(1.5, (0.1, 0.1))
    app_log_mock.warning.assert_called_once()


def test_half_periods(params):
    assert params.half_periods == pytest.approx((math.pi / 0.05, math.pi / 0.1))
    assert params.with_speed(1.1).c == 1.1


def test_truncation_round_trip():
    trunc = TruncationSet.from_dict(BOXES)
    assert trunc.to_dict()["n_tail"] == [40, 15]
    with pytest.raises(ConstraintViolation):
        TruncationSet.from_dict(dict(BOXES, n_gal=(-1, 2)))


def test_valid_configuration(params):
    TruncationSet.from_dict(BOXES).validate(params)


@pytest.mark.parametrize(
    "change, constraint",
    [
        ({"n_alias": (20, 40)}, "N_alias>=N_jac"),
        ({"n_alias": (50, 40)}, "N_alias>=N_gal"),
        ({"n_col": (20, 20), "n_tail": (20, 15)}, "N_col>=N_jac"),
        ({"n_row": (160, 5)}, "N_row>=N_jac"),
        ({"n_tail": (25, 15)}, "N_jac<=N_tail"),
        ({"n_tail": (70, 15)}, "N_tail<=N_col"),
        ({"n_fft": (200, 128)}, "N_fft=2^k"),
        ({"n_fft": (64, 128)}, "N_alias<N_fft"),
    ],
)
def test_each_constraint_is_named(params, change, constraint):
    with pytest.raises(ConstraintViolation) as err:
        TruncationSet.from_dict(dict(BOXES, **change)).validate(params)
    assert err.value.constraint == constraint


def test_jacobian_box_below_threshold(mocker, params):
    app_log_mock = mocker.patch("covalent_sbwave.problem.app_log")
    trivial = {k: v for k, v in get_preset("trivial").items() if k.startswith("n_")}
    TruncationSet.from_dict(trivial).validate(params)
    app_log_mock.warning.assert_called()

    fast = ProblemParams(1.5, (0.05, 0.1))
    with pytest.raises(ConstraintViolation) as err:
        TruncationSet.from_dict(dict(BOXES, n_jac=(10, 10))).validate(fast)
    assert err.value.constraint == "N_jac1>c/q1"


def test_lambda_values():
    params = ProblemParams(1.0, (1.0, 1.0))
    assert lambda_n(1, 0, params).contains(1.0)
    assert lambda_n(1, 1, params).contains(4.0)
    assert lambda_n(0, 0, params).contains(1.0)


@pytest.mark.parametrize("dims", [(30, 10), (10, 10), (18, 0), (60, 20)])
def test_lambda_min_is_the_minimum_outside_the_box(params, dims):
    n1, n2 = np.meshgrid(np.arange(400), np.arange(200), indexing="ij")
    outside = (n1 > dims[0]) | (n2 > dims[1])
    brute = float_lambda(n1, n2, params)[outside].min()
    bound = lambda_min(dims, params)
    assert float(bound.lo) <= brute
    assert float(bound.hi) == pytest.approx(brute, rel=1e-12)


def test_lambda_min_rejects_nonpositive_lambda():
    with pytest.raises(ConstraintViolation) as err:
        lambda_min((5, 5), ProblemParams(1.5, (0.05, 0.1)))
    assert err.value.constraint == "N1>c/q1"


def test_jacobian_of_constant_derivative_is_shifted_lambda(params):
    n_jac = (4, 3)
    bprime = CoeffGrid.unit((0, 0), (8, 6))
    DF = assemble_DF(CoeffGrid.zeros(n_jac), bprime, n_jac, params)
    expected = np.diag(lambda_grid(n_jac, params).mid.ravel() + 1.0)
    np.testing.assert_allclose(DF, expected, atol=1e-14)


def test_jacobian_columns_are_convolutions(params):
    rng = np.random.default_rng(9)
    bprime = CoeffGrid(rng.normal(size=(9, 7)))
    n_jac = (4, 3)
    DF = assemble_DF(CoeffGrid.zeros(n_jac), bprime, n_jac, params)
    lam = lambda_grid(n_jac, params).mid
    for k in [(0, 0), (2, 0), (1, 3), (4, 2)]:
        column = convolve(bprime, CoeffGrid.unit(k)).resized(n_jac).values.ravel().copy()
        column[flat(*k, n_jac)] += lam[k]
        np.testing.assert_allclose(DF[:, flat(*k, n_jac)], column, atol=1e-12)


def test_rigorous_jacobian_encloses_float_jacobian(params):
    ap = AnalyticityParams((0.5, 0.5))
    a = CoeffGrid(np.array([[0.0, 0.1], [0.2, 0.05]]))
    enclosed = enclose_b(a, ap, NonlinearityVariant.GP, (6, 6), (16, 16))
    float_DF = assemble_DF(a, enclosed, (3, 3), params)
    interval_DF = assemble_DF(a, enclosed, (3, 3), params, rigorous=True)
    assert isinstance(interval_DF, Interval)
    assert np.all(interval_DF.lo <= float_DF + 1e-12)
    assert np.all(float_DF - 1e-12 <= interval_DF.hi)


def test_operator_from_jacobian(params):
    rng = np.random.default_rng(1)
    n_jac = (3, 2)
    bprime = CoeffGrid(0.1 * rng.normal(size=(7, 5)))
    DF = assemble_DF(CoeffGrid.zeros(n_jac), bprime, n_jac, params)
    A = OperatorA.from_jacobian(DF, n_jac, params)
    np.testing.assert_allclose(A.block @ DF, np.eye(12), atol=1e-10)
    assert A.memory_bytes == 8 * 12**2


def test_operator_rejects_bad_blocks(params):
    with pytest.raises(ValueError):
        OperatorA(np.eye(5), (1, 1), params)
    block = np.eye(4)
    block[0, 1] = np.nan
    with pytest.raises(ConstraintViolation):
        OperatorA(block, (1, 1), params)


def test_apply_A_tail_is_inverse_lambda(params):
    n_jac = (2, 2)
    A = OperatorA(np.eye(9), n_jac, params)
    v = CoeffGrid.unit((5, 1))
    out = apply_A(A, v)
    assert out.values[5, 1] == pytest.approx(1.0 / float_lambda(5, 1, params))
    inside = apply_A(A, CoeffGrid(np.ones((3, 3))))
    np.testing.assert_allclose(inside.values, np.ones((3, 3)))
    enclosed = apply_A(A, CoeffGrid(Interval(v.values)))
    assert enclosed.values[5, 1].contains(1.0 / float_lambda(5, 1, params))


def test_norm_of_diagonal_operator(params):
    n_jac = (30, 10)
    lam = lambda_grid(n_jac, params).mid.ravel()
    A = OperatorA(np.diag(1.0 / lam), n_jac, params)
    n1, n2 = np.meshgrid(np.arange(400), np.arange(200), indexing="ij")
    brute = 1.0 / float_lambda(n1, n2, params).min()
    norm = norm_A(A, NormParams((1.0, 1.0)))
    assert float(norm.hi) == pytest.approx(brute, rel=1e-10)
    assert float(norm.hi) >= brute * (1 - 1e-12)


def test_residual_of_zero_profile_vanishes(params):
    ap = AnalyticityParams((0.5, 0.5))
    enclosed = enclose_b(CoeffGrid.zeros((2, 2)), ap, NonlinearityVariant.G, (4, 4), (16, 16))
    residual = residual_grid(CoeffGrid.zeros((2, 2)), enclosed, (6, 6), params)
    assert np.all(residual.contains(0.0))
