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

"""Y, Z and W bounds and the radii polynomial check.

With ``p(r) = W r^2 / 2 - (1 - Z) r + Y``, ``Z < 1`` and ``2 Y W < (1 - Z)^2``
there is a unique zero of ``F`` in the ``nu``-ball of radius ``r`` around
``a_bar`` for every ``r`` in ``[r_min, r_max]``. ``W`` bounds ``A D^2F`` on the
ball of radius ``r_star``, so ``r_max`` stays strictly below ``r_star`` and ``(1 - Z) / W``.

All returned bounds are upward-rounded floats.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from covalent._shared_files import logger
from scipy import optimize

from .coeffs import CoeffGrid, IndexPair, NormParams, flat, flat_indices, outside_mask
from .config import get_setting
from .exceptions import ConstraintViolation, RadiiPolynomialError
from .interval import (
    Interval,
    accumulation_factor,
    next_down,
    format_interval,
    iv_exp,
    iv_matmul,
    iv_max,
    next_up,
    upper_matvec,
    upper_sum,
)
from .problem import (
    OperatorA,
    ProblemParams,
    TruncationSet,
    column_weighted_sums,
    lambda_grid,
    lambda_min,
    norm_A,
    reflection_kernel,
)
from .rigorous_dft import AnalyticityParams, EnclosedCoeffs, f_geo

app_log = logger.app_log
log_stack_info = logger.log_stack_info


@dataclass(frozen=True)
class YBound:
    Y: float
    block: float
    mid_range: float
    tail: float


@dataclass(frozen=True)
class ZBound:
    Z: float
    Z_col: float
    Z_est: float
    Z_est_block: float
    Z_est_tail_rows: float
    Z_est_far: float


@dataclass(frozen=True)
class WBound:
    W_hat: float
    norm_A: float
    norm_bpp: float

    def at(self, r_star: float) -> float:
        """``W = W_hat e^{r_star}``."""
        return float((Interval(self.W_hat) * iv_exp(Interval(r_star))).hi)


@dataclass(frozen=True)
class RadiiResult:
    r_star: float
    r_min: float
    r_max: float
    W: float


def _sum_up(*values: float) -> float:
    return float(upper_sum(np.array(values, dtype=np.float64)))


def bound_Y(
    a_bar: CoeffGrid,
    A: OperatorA,
    enclosed: EnclosedCoeffs,
    params: ProblemParams,
    trunc: TruncationSet,
    w: NormParams,
) -> YBound:
    """Upper bound of ``||A F(a_bar)||_nu``.

    Three pieces: the block ``A F`` on ``I+_{N_jac}``, the diagonal range
    ``I+_{N_alias}`` minus the block where ``A = 1/lambda``, and the geometric tail
    beyond ``N_alias`` where ``a_bar`` vanishes.
    """
    n_jac, n_alias = A.n_jac, trunc.n_alias
    ratio = enclosed.ap.weight_ratio(w)
    lam = lambda_grid(n_alias, params)
    residual = lam * a_bar.resized(n_alias).as_interval() + enclosed.enclosure()
    omega = w.weights(n_alias)

    jac = (slice(0, n_jac[0] + 1), slice(0, n_jac[1] + 1))
    A_residual = iv_matmul(A.block, residual[jac].copy().ravel())
    block = float(upper_sum((A_residual.abs() * omega[jac].copy().ravel()).hi))

    mask = outside_mask(n_alias, n_jac)
    mid_terms = (residual[mask].abs() / lam[mask] * omega[mask]).hi
    mid_range = float(upper_sum(mid_terms))

    tail = Interval(enclosed.C_hat) / lambda_min(n_alias, params) * f_geo(ratio, n_alias)
    bound = YBound(_sum_up(block, mid_range, float(tail.hi)), block, mid_range, float(tail.hi))
    app_log.debug(f"Y pieces: block={block!r} mid={mid_range!r} tail={format_interval(tail)}")
    return bound


def mu_hat(j1, j2, dims: IndexPair, w: NormParams, ap: AnalyticityParams) -> Interval:
    """Enclosure of ``max_{k not in I+_N} mu(j, k)`` for ``j`` in ``I+_N`` (vectorized).

    ``mu(j, k) = 1/4 sum_i nu_bar^(-|j - h_i(k)|) nu^(-k)`` factors per axis and
    decreases in ``k_j`` beyond ``N_j``, so the maximum is attained on the
    boundary rows ``k1 = N1 + 1`` or ``k2 = N2 + 1``.
    """
    j1 = np.atleast_1d(np.asarray(j1))
    j2 = np.atleast_1d(np.asarray(j2))
    if np.any(j1 > dims[0]) or np.any(j2 > dims[1]) or np.any(j1 < 0) or np.any(j2 < 0):
        raise ConstraintViolation("j in I+_N", f"mu_hat needs indices inside I+_{dims}")
    log_nu = w.log_nu()

    def axis_factor(j: np.ndarray, n: int, axis: int) -> Interval:
        k = np.arange(n + 2, dtype=np.float64)[None, :]
        jj = j.astype(np.float64)[:, None]
        base = Interval(k) * log_nu[axis]
        rho = ap.rho_bar[axis]
        near = iv_exp(-(Interval(np.abs(jj - k)) * rho + base))
        far = iv_exp(-(Interval(jj + k) * rho + base))
        return near + far

    f1 = axis_factor(j1, dims[0], 0)
    f2 = axis_factor(j2, dims[1], 1)
    right = f1[:, -1] * iv_max(f2, axis=1)
    top = iv_max(f1, axis=1) * f2[:, -1]
    largest = Interval(np.maximum(right.lo, top.lo), np.maximum(right.hi, top.hi))
    return largest * 0.25


def _kernel_magnitudes(magnitudes: np.ndarray, rows, cols) -> np.ndarray:
    """Upper bounds of ``|(gamma_k/4) sum_i b_{|j - h_i(k)|}|`` from a table of ``|b|``."""
    j1 = rows[0][:, None]
    j2 = rows[1][:, None]
    k1 = cols[0][None, :]
    k2 = cols[1][None, :]
    d1, s1 = np.abs(j1 - k1), j1 + k1
    d2, s2 = np.abs(j2 - k2), j2 + k2
    total = magnitudes[d1, d2] + magnitudes[s1, d2] + magnitudes[d1, s2] + magnitudes[s1, s2]
    scale = np.left_shift(1, (k1 != 0).astype(int) + (k2 != 0).astype(int)) / 4.0
    return next_up(total * (1.0 + accumulation_factor(4)) * scale)


def bound_Z(
    a_bar: CoeffGrid,
    A: OperatorA,
    enclosed: EnclosedCoeffs,
    params: ProblemParams,
    trunc: TruncationSet,
    w: NormParams,
    threads: Optional[int] = None,
    chunk: Optional[int] = None,
) -> ZBound:
    """Upper bound of ``||I - A DF(a_bar)||`` in the weighted l1 operator norm.

    Columns ``k`` in ``I+_{N_col}`` are bounded one by one: the block defect on
    ``I+_{N_jac}`` rows, explicit rows ``I+_{N_row}`` minus the block, and a
    geometric bound for the remaining rows. The other columns share a uniform
    estimate through ``mu_hat`` on ``I+_{N_col}``. ``Z`` is the larger of both.
    """
    threads = get_setting("threads", threads)
    chunk = get_setting("column_chunk", chunk)
    ap = enclosed.ap
    ratio = ap.weight_ratio(w)
    n_jac, n_col, n_row, n_tail = A.n_jac, trunc.n_col, trunc.n_row, trunc.n_tail
    C = Interval(enclosed.C_hat)

    jac_rows = flat_indices(n_jac)
    lam_jac = lambda_grid(n_jac, params).ravel()
    omega_jac = w.weights(n_jac).ravel()
    row_mask = outside_mask(n_row, n_jac).ravel()
    row_index = tuple(idx[row_mask] for idx in flat_indices(n_row))
    row_factor = (
        w.weights(n_row).ravel()[row_mask] / lambda_grid(n_row, params).ravel()[row_mask]
    ).hi
    magnitudes = enclosed.magnitudes((n_row[0] + n_col[0], n_row[1] + n_col[1]))

    cols = flat_indices(n_col)
    omega_col = w.weights(n_col).ravel()
    inv_omega_col = (1.0 / omega_col).hi
    log_nu = w.log_nu()
    nu_exponent = Interval(cols[0].astype(float)) * log_nu[0] + Interval(
        cols[1].astype(float)
    ) * log_nu[1]
    nu_decay = iv_exp(-nu_exponent)
    row_tail = (
        C * ap.growth(*cols) * nu_decay / lambda_min(n_row, params) * f_geo(ratio, n_row)
    ).hi
    block_size = jac_rows[0].size
    chunk = max(1, min(int(chunk), int(4e6 // max(row_index[0].size, 1))))
    enclosed.table((n_jac[0] + n_col[0], n_jac[1] + n_col[1]))

    def column_chunk(start: int) -> float:
        stop = min(start + chunk, cols[0].size)
        k1, k2 = cols[0][start:stop], cols[1][start:stop]
        toeplitz = reflection_kernel(enclosed.lookup, jac_rows, (k1, k2))
        defect = -iv_matmul(A.block, toeplitz)
        in_jac = np.nonzero((k1 <= n_jac[0]) & (k2 <= n_jac[1]))[0]
        if in_jac.size:
            k_flat = flat(k1[in_jac], k2[in_jac], n_jac)
            identity = (np.arange(block_size)[:, None] == k_flat[None, :]).astype(np.float64)
            scaled = Interval(A.block[:, k_flat]) * lam_jac[k_flat].reshape(1, -1)
            direct = Interval(identity) - scaled
            defect[:, in_jac] = defect[:, in_jac] + direct
        block_part = upper_sum((defect.abs() * omega_jac.reshape(-1, 1)).hi, axis=0)
        if row_index[0].size:
            row_magnitudes = _kernel_magnitudes(magnitudes, row_index, (k1, k2))
            row_part = upper_matvec(row_magnitudes.T, row_factor)
        else:
            row_part = np.zeros_like(block_part)
        totals = next_up(next_up(block_part + row_part) * inv_omega_col[start:stop])
        totals = next_up(totals + row_tail[start:stop])
        return float(totals.max())

    starts = range(0, cols[0].size, chunk)
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        # map preserves order, max is order independent
        z_col = max(pool.map(column_chunk, starts))

    # Uniform estimate for columns outside I+_{N_col}
    mu_block = mu_hat(*jac_rows, n_col, w, ap)
    col_sums = column_weighted_sums(A.block, n_jac, w)
    est_block = float((C * Interval(upper_sum((mu_block * col_sums).hi))).hi)

    tail_mask = outside_mask(n_tail, n_jac).ravel()
    tail_rows = tuple(idx[tail_mask] for idx in flat_indices(n_tail))
    if tail_rows[0].size:
        mu_tail = mu_hat(*tail_rows, n_col, w, ap)
        tail_weights = (
            w.weights(n_tail).ravel()[tail_mask] / lambda_grid(n_tail, params).ravel()[tail_mask]
        )
        est_tail_rows = float((C * Interval(upper_sum((mu_tail * tail_weights).hi))).hi)
    else:
        est_tail_rows = 0.0

    est_far = float((enclosed.weighted_norm(w) / lambda_min(n_tail, params)).hi)
    z_est = _sum_up(est_block, est_tail_rows, est_far)
    bound = ZBound(max(z_col, z_est), z_col, z_est, est_block, est_tail_rows, est_far)
    app_log.debug(f"Z components: {bound}")
    return bound


def bound_W(
    a_bar: CoeffGrid,
    A: OperatorA,
    enclosed: EnclosedCoeffs,
    params: ProblemParams,
    trunc: TruncationSet,
    w: NormParams,
) -> WBound:
    """``W_hat = ||A|| ||b''||_nu`` with ``b''`` the coefficients of ``e^{u_bar}``.

    On the ball of radius ``r_star``, ``||e^{a_bar + h}|| <= ||e^{a_bar}|| e^{r_star}``,
    so ``W = W_hat e^{r_star}`` (see ``WBound.at``).
    """
    operator_norm = norm_A(A, w)
    norm_b = enclosed.weighted_norm(w)
    W_hat = (operator_norm * norm_b).hi
    return WBound(float(W_hat), float(operator_norm.hi), float(norm_b.hi))


def minimize_p_hat(Y: float, Z: float, W_hat: float) -> float:
    """Numerical minimizer of ``W_hat e^r r^2 / 2 - (1 - Z) r + Y`` over ``r > 0``.

    A log-spaced grid locates the basin, a bounded scalar search refines it.
    The result only has to witness feasibility, it is checked rigorously afterwards.
    """
    gap = 1.0 - Z

    def p_hat(log_r: float) -> float:
        r = math.exp(log_r)
        return 0.5 * W_hat * math.exp(r) * r * r - gap * r + Y

    upper = math.log(min(50.0, max(10.0 * gap / max(W_hat, 1e-300), 1e-12)))
    grid = np.linspace(math.log(1e-20), upper, 400)
    values = np.array([p_hat(s) for s in grid])
    best = int(np.argmin(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    if hi <= lo:
        return float(math.exp(grid[best]))
    result = optimize.minimize_scalar(p_hat, bounds=(lo, hi), method="bounded")
    return float(math.exp(result.x))


def find_rstar(Y: float, Z: float, W_hat: float, r_star: Optional[float] = None) -> RadiiResult:
    """Pick ``r_star`` and verify the radii polynomial conditions in interval arithmetic.

    Args:
        Y: Residual bound
        Z: Defect bound
        W_hat: Second derivative bound before the ``e^{r_star}`` factor
        r_star: Use this radius instead of minimizing ``p_hat``

    Returns:
        RadiiResult with ``r_min < r_max``

    Raises:
        RadiiPolynomialError: naming ``Z<1``, ``2YW<(1-Z)^2`` or ``r_min<r_max``
    """
    if not Z < 1.0:
        raise RadiiPolynomialError("Z<1", f"Z={Z!r}")
    if r_star is None:
        r_star = minimize_p_hat(Y, Z, W_hat)
    if not r_star > 0:
        raise RadiiPolynomialError("r_min<r_max", f"r_star={r_star!r} must be positive")
    W = WBound(W_hat, 0.0, 0.0).at(r_star)
    gap = 1.0 - Interval(Z)
    discriminant = gap.sqr() - 2.0 * Interval(Y) * W
    if not float(discriminant.lo) > 0:
        raise RadiiPolynomialError(
            "2YW<(1-Z)^2", f"Y={Y!r} Z={Z!r} W={W!r} discriminant={format_interval(discriminant)}"
        )
    r_min = float((2.0 * Interval(Y) / (gap + discriminant.sqrt())).hi)
    # largest float strictly below the radius limit
    limit = r_star if W == 0 else min(float((gap / W).lo), r_star)
    r_max = float(next_down(limit))
    if not r_min < r_max:
        raise RadiiPolynomialError("r_min<r_max", f"r_min={r_min!r} r_max={r_max!r}")
    app_log.debug(f"Radii polynomial: r_star={r_star!r} r_min={r_min!r} r_max={r_max!r} W={W!r}")
    return RadiiResult(float(r_star), r_min, float(r_max), W)
