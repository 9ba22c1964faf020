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

"""Taylor truncation of the exponential nonlinearity.

``F = F^(M) + F^(inf)`` with ``F^(M)_n = lambda_n a_n + sum_{k=2}^M (a^{*k})_n / k!``
computed by exact convolutions, and ``||F^(inf)(a)||_nu`` bounded by the
remainder of the exponential series at ``||a||_nu``. Numerical branches of the
truncated problem for even and odd ``M`` are compared by ``parity_experiment``.
"""

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from covalent._shared_files import logger

from .coeffs import CoeffGrid, IndexPair, NormParams, convolve, norm_ell1_nu
from .config import get_setting
from .exceptions import ConstraintViolation
from .interval import Interval, format_interval, next_up, upper_sum
from .problem import OperatorA, ProblemParams, TruncationSet, apply_A, lambda_grid, norm_A
from .solver import (
    BranchRecord,
    SolveConfig,
    TaylorNonlinearity,
    continuation,
    solve,
)

app_log = logger.app_log
log_stack_info = logger.log_stack_info

_TAIL_MAX_TERMS = 100000


@dataclass(frozen=True)
class SeriesOrder:
    """Truncation order ``M`` of ``sum_{k=2}^M u^k / k!``."""

    M: int

    def __post_init__(self) -> None:
        if int(self.M) < 2:
            raise ConstraintViolation("M>=2", f"series order must be at least 2, got {self.M}")
        object.__setattr__(self, "M", int(self.M))


def _order(order: Union[SeriesOrder, int]) -> int:
    return order.M if isinstance(order, SeriesOrder) else SeriesOrder(order).M


def F_M(a: CoeffGrid, order: Union[SeriesOrder, int], params: ProblemParams) -> CoeffGrid:
    """``F^(M)(a)`` on ``I+_{M N}`` where ``a`` lives on ``I+_N``.

    The powers ``a^{*k}`` are chained, each one convolution from the previous,
    since every power up to ``M`` enters the sum. Interval inputs give interval
    outputs.
    """
    M = _order(order)
    dims = (M * a.dims[0], M * a.dims[1])
    lam = lambda_grid(dims, params)
    base = a.resized(dims)
    if a.is_interval:
        total = lam * base.values
    else:
        total = lam.mid * base.values
    power = a
    for k in range(2, M + 1):
        power = convolve(power, a)
        term = power.resized(dims).values
        if a.is_interval:
            total = total + term / float(math.factorial(k))
        else:
            total = total + term / math.factorial(k)
    return CoeffGrid(total)


def tail_norm(norm_a: Union[Interval, float], order: Union[SeriesOrder, int]) -> Interval:
    """Enclosure of ``e^x - sum_{k=0}^M x^k / k!`` for ``x`` in ``norm_a``.

    Summed as ``sum_{k>M} x^k / k!`` term by term instead of subtracting from
    ``e^x``. Once the ratio ``x / (k+1)`` is below one half and the next term no
    longer changes the sum, the rest is bounded by the geometric series
    ``t_k / (1 - x / (k+1))``.
    """
    M = _order(order)
    x = Interval.coerce(norm_a)
    if float(x.lo) < 0:
        raise ConstraintViolation("norm>=0", f"a norm cannot be negative, got {x!r}")
    term = Interval(1.0)
    for k in range(1, M + 2):
        term = term * x / float(k)
    total = Interval(0.0)
    k = M + 1
    for _ in range(_TAIL_MAX_TERMS):
        total = total + term
        k += 1
        term = term * x / float(k)
        ratio = float((x / float(k + 1)).hi)
        if float(term.hi) == 0.0:
            return total
        if ratio < 0.5 and float(term.hi) <= float(total.hi) * 2.0**-53:
            remainder = float(next_up(float(term.hi) / (1.0 - ratio)))
            remainder = float(next_up(remainder * (1.0 + 2.0**-52)))
            return total + Interval(0.0, remainder)
    raise ConstraintViolation("tail converged", f"series tail at {x!r} did not settle")


def bound_Y_ps(
    a_bar: CoeffGrid,
    A: OperatorA,
    order: Union[SeriesOrder, int],
    params: ProblemParams,
    trunc: TruncationSet,
    w: NormParams,
) -> float:
    """``||A F^(M)(a_bar)||_nu + ||A|| tail_norm(||a_bar||_nu, M)``, upward rounded.

    ``F^(M)(a_bar)`` vanishes outside ``I+_{M N_gal}``, so the first term is a
    finite sum.
    """
    M = _order(order)
    a = a_bar.resized(trunc.n_gal)
    a = CoeffGrid(a.as_interval())
    truncated = apply_A(A, F_M(a, M, params))
    first = norm_ell1_nu(truncated, w)
    tail = norm_A(A, w) * tail_norm(norm_ell1_nu(a, w), M)
    bound = float(upper_sum(np.array([float(first.hi), float(tail.hi)])))
    app_log.debug(
        f"Power series Y (M={M}): finite={format_interval(first)} tail={format_interval(tail)}"
    )
    return bound


# ---- parity experiment ------------------------------------------------------------


def _branch(
    order: int,
    params: ProblemParams,
    c_end: float,
    step: float,
    base: CoeffGrid,
    cfg: SolveConfig,
) -> List[BranchRecord]:
    records = continuation(params, c_end, step, base, cfg, TaylorNonlinearity(order))
    app_log.debug(f"Branch M={order}: {len(records)} points, last c={records[-1].c}")
    return records


def parity_experiment(
    c_range: Tuple[float, float],
    orders: Sequence[int],
    params: ProblemParams,
    n_gal: IndexPair,
    step: float = 0.01,
    cfg: Optional[SolveConfig] = None,
    base: Optional[CoeffGrid] = None,
    threads: Optional[int] = None,
) -> Dict[int, List[BranchRecord]]:
    """Continue the truncated problem for every ``M`` over ``c_range``.

    All branches start from the same profile at ``c_range[0]``: ``base`` if
    given, otherwise ``solve`` of the full exponential problem, which follows
    ``cfg.seed_c`` when set and rejects a collapse onto the zero solution.

    Args:
        c_range: Start and end speed, e.g. ``(1.4, 1.0)``
        orders: Series orders ``M``
        params: Template parameters; the speed is replaced by ``c_range[0]``
        n_gal: Galerkin box
        step: Continuation step in ``c``
        cfg: Solver settings
        base: Starting profile on ``I+_{N_gal}``
        threads: Number of branches continued at the same time

    Returns:
        Branch records keyed by ``M`` in the order given

    Raises:
        ConvergenceError: the base profile could not be computed
    """
    cfg = cfg or SolveConfig()
    start = params.with_speed(c_range[0])
    if base is None:
        base = solve(start, n_gal, cfg)
    elif cfg.guess != "zero" and not np.any(base.midpoints()):
        app_log.warning(f"Parity branches start from the zero solution at c={start.c}")
    threads = max(1, int(get_setting("threads", threads)))
    orders = [SeriesOrder(m).M for m in orders]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_branch, m, start, c_range[1], step, base, cfg) for m in orders
        ]
        results = [f.result() for f in futures]
    return dict(zip(orders, results))


def branch_gap(first: Sequence[BranchRecord], second: Sequence[BranchRecord], c: float) -> float:
    """Relative difference of the sup norms of two branches at speed ``c``.

    Returns ``nan`` unless both branches hold a converged point at ``c``.
    """

    def lookup(records: Sequence[BranchRecord]) -> Optional[BranchRecord]:
        for record in records:
            if record.converged and abs(record.c - c) <= 1e-9:
                return record
        return None

    a, b = lookup(first), lookup(second)
    if a is None or b is None:
        return float("nan")
    scale = max(a.norm_inf, b.norm_inf)
    return abs(a.norm_inf - b.norm_inf) / scale if scale > 0 else 0.0


def write_parity_csv(path: str, branches: Dict[int, List[BranchRecord]]) -> Tuple[str, str]:
    """Plot data ``c,M,norm,converged`` with the sup norm, plus an ``_ell1`` companion file."""
    root, ext = os.path.splitext(path)
    ell1_path = f"{root}_ell1{ext or '.csv'}"
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    for target, attribute in ((path, "norm_inf"), (ell1_path, "norm_ell1")):
        try:
            with open(target, "w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(["c", "M", "norm", "converged"])
                for order, records in branches.items():
                    for record in records:
                        norm = getattr(record, attribute)
                        writer.writerow([repr(record.c), order, repr(norm), int(record.converged)])
        except OSError as e:
            app_log.exception(e)
            raise
    return path, ell1_path
