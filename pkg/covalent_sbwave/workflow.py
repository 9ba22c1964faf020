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

"""Covalent electrons and lattices for dispatching solves and proofs.

Electrons exchange plain dicts and nested lists so that any Covalent executor
can move them. The executor defaults to the ``executor`` setting.
"""

from typing import Dict, List

import covalent as ct
import numpy as np

from .coeffs import CoeffGrid
from .config import get_setting
from .power_series import SeriesOrder
from .proof import prove
from .run_config import RunConfig
from .solver import ExponentialNonlinearity, TaylorNonlinearity, continuation, solve

EXECUTOR = get_setting("executor")


@ct.electron(executor=EXECUTOR)
def solve_electron(config: Dict) -> List[List[float]]:
    """Approximate zero on ``I+_{N_gal}`` as nested lists."""
    run = RunConfig.from_dict(config)
    a_bar = solve(run.params, run.trunc.n_gal, run.solver)
    return a_bar.midpoints().tolist()


@ct.electron(executor=EXECUTOR)
def prove_electron(config: Dict, a_bar: List[List[float]]) -> Dict:
    """Certificate dict for the candidate ``a_bar``."""
    run = RunConfig.from_dict(config)
    cert = prove(
        run.params,
        run.trunc,
        run.norm,
        run.analyticity,
        CoeffGrid(np.asarray(a_bar, dtype=np.float64)),
        threads=run.threads,
        r_star=run.r_star,
    )
    return cert.to_dict()


@ct.electron(executor=EXECUTOR)
def branch_electron(config: Dict, a_bar: List[List[float]], order: int = 0) -> List[Dict]:
    """Continue from ``a_bar`` to ``c_end``; ``order`` 0 keeps the exponential."""
    run = RunConfig.from_dict(config)
    nonlinearity = (
        TaylorNonlinearity(SeriesOrder(order).M) if order else ExponentialNonlinearity()
    )
    records = continuation(
        run.params,
        run.c_end,
        run.step,
        CoeffGrid(np.asarray(a_bar, dtype=np.float64)),
        run.solver,
        nonlinearity,
    )
    return [
        {
            "c": r.c,
            "M": order,
            "norm_inf": r.norm_inf,
            "norm_ell1": r.norm_ell1,
            "converged": r.converged,
        }
        for r in records
    ]


@ct.lattice
def proof_workflow(config: Dict) -> Dict:
    a_bar = solve_electron(config)
    return prove_electron(config, a_bar)


@ct.lattice
def parity_workflow(config: Dict, orders: List[int]) -> List[List[Dict]]:
    """One branch electron per series order, all from the same exponential solution."""
    a_bar = solve_electron(config)
    return [branch_electron(config, a_bar, order) for order in orders]
