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


import time

import pytest

from covalent_sbwave.coeffs import CoeffGrid
from covalent_sbwave.proof import prove, verify_certificate
from covalent_sbwave.run_config import RunConfig
from covalent_sbwave.solver import initial_guess, solve, sup_norm


def approximate_zero(config):
    return solve(config.params, config.trunc.n_gal, config.solver)


@pytest.mark.functional_tests
def test_trivial_certificate_is_fast():
    config = RunConfig.from_dict({"preset": "trivial"})
    start = time.perf_counter()
    cert = prove(
        config.params,
        config.trunc,
        config.norm,
        config.analyticity,
        CoeffGrid.zeros(config.trunc.n_gal),
    )
    elapsed = time.perf_counter() - start
    assert cert.proven
    assert cert.Y <= 1e-12
    assert cert.Z <= 1e-8
    assert cert.r_min <= 1e-10
    assert elapsed <= 10.0


@pytest.mark.functional_tests
def test_one_peak_at_c_1_3():
    config = RunConfig.from_dict({"preset": "one-peak-c1.3-desk"})
    a_bar = approximate_zero(config)
    assert sup_norm(a_bar) > 0.1
    cert = prove(config.params, config.trunc, config.norm, config.analyticity, a_bar)
    print(cert.to_json())
    assert cert.Z < 1.0
    assert cert.proven
    assert cert.r_min <= 5e-3
    verify_certificate(cert, a_bar)


@pytest.mark.functional_tests
def test_full_one_peak_configuration_is_accepted():
    config = RunConfig.from_dict({"preset": "one-peak-c1.1"})
    assert config.trunc.n_fft == (1024, 1024)
    guess = initial_guess(config.params, config.trunc.n_gal, config.solver)
    assert guess.dims == config.trunc.n_gal
    config.trunc.validate(config.params)
