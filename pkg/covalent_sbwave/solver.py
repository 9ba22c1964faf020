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

"""Floating point numerics: initial guesses, damped Newton and continuation in ``c``.

Nothing here is rigorous. ``G(u)`` is evaluated by sampling ``u`` on the
type-1 DCT mesh of a quarter period and transforming back.
"""

import csv
import math
import os
from dataclasses import dataclass, fields
from typing import List, Optional, Sequence, Tuple

import numpy as np
from covalent._shared_files import logger
from numpy.polynomial import polynomial
from scipy import linalg, special

from .coeffs import CoeffGrid, IndexPair, gamma, index_grid
from .config import get_setting
from .dumps import load_coefficients, write_coeff_csv
from .exceptions import ConstraintViolation, ConvergenceError
from .problem import ProblemParams, assemble_DF, lambda_grid
from .rigorous_dft import dct_coefficients, dct_samples

app_log = logger.app_log
log_stack_info = logger.log_stack_info

GUESSES = ("zero", "one_peak", "two_peak", "combination", "from_file")


@dataclass
class SolveConfig:
    """Newton and initial guess settings; unset fields come from ``get_setting``."""

    max_iters: Optional[int] = None
    residual_tol: Optional[float] = None
    damping: Optional[float] = None
    min_damping: Optional[float] = None
    dense_jacobian_limit: Optional[int] = None
    guess: Optional[str] = None
    amplitude: Optional[float] = None
    width: Optional[float] = None
    separation: Optional[float] = None
    seed_c: Optional[float] = None
    seed_step: Optional[float] = None
    a_bar_file: Optional[str] = None

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.name not in ("a_bar_file", "seed_c"):
                setattr(self, f.name, get_setting(f.name, getattr(self, f.name)))
        if int(self.max_iters) < 1:
            raise ConstraintViolation("max_iters>=1", f"got max_iters={self.max_iters}")
        if not float(self.residual_tol) > 0:
            raise ConstraintViolation("residual_tol>0", f"got residual_tol={self.residual_tol}")
        if not 0 < float(self.damping) <= 1:
            raise ConstraintViolation("0<damping<=1", f"got damping={self.damping}")
        if self.guess not in GUESSES:
            raise ConstraintViolation("guess", f"unknown guess {self.guess!r}, expected {GUESSES}")
        if self.guess == "from_file" and not self.a_bar_file:
            raise ConstraintViolation("a_bar_file", "guess=from_file needs a_bar_file")
        if self.seed_c is not None and not float(self.seed_c) > 0:
            raise ConstraintViolation("seed_c>0", f"got seed_c={self.seed_c}")
        if not float(self.seed_step) > 0:
            raise ConstraintViolation("seed_step>0", f"got seed_step={self.seed_step}")


class ExponentialNonlinearity:
    """``G(u) = e^u - u - 1``."""

    order = None

    def value(self, u: np.ndarray) -> np.ndarray:
        return np.expm1(u) - u

    def derivative(self, u: np.ndarray) -> np.ndarray:
        return np.expm1(u)

    def __repr__(self) -> str:
        return "ExponentialNonlinearity()"


class TaylorNonlinearity:
    """Taylor polynomial ``sum_{k=2}^M u^k / k!`` of ``G``."""

    def __init__(self, order: int) -> None:
        if int(order) < 2:
            raise ConstraintViolation("M>=2", f"series order must be at least 2, got {order}")
        self.order = int(order)
        inverse_factorials = 1.0 / special.factorial(np.arange(self.order + 1))
        self._value = inverse_factorials.copy()
        self._value[:2] = 0.0
        self._derivative = inverse_factorials[: self.order].copy()
        self._derivative[0] = 0.0

    def value(self, u: np.ndarray) -> np.ndarray:
        return polynomial.polyval(u, self._value)

    def derivative(self, u: np.ndarray) -> np.ndarray:
        return polynomial.polyval(u, self._derivative)

    def __repr__(self) -> str:
        return f"TaylorNonlinearity(order={self.order})"


def mesh_for(n_gal: IndexPair, order: Optional[int] = None) -> IndexPair:
    """Power-of-two DCT mesh for a Galerkin box.

    Products up to ``u^M`` are resolved without aliasing onto ``I+_{N_gal}``
    when ``N_fft > (M + 1) N_gal / 2``; the exponential uses ``2 N_gal``.
    """
    factor = 2.0 if order is None else max(2.0, (order + 1) / 2.0)
    return tuple(1 << int(math.ceil(math.log2(math.ceil(factor * n) + 2))) for n in n_gal)


def galerkin_residual(
    a: np.ndarray, params: ProblemParams, n_fft: IndexPair, nonlinearity=None
) -> np.ndarray:
    """Midpoint ``F_n(a)`` for ``n`` in the box of ``a``."""
    nonlinearity = nonlinearity or ExponentialNonlinearity()
    dims = (a.shape[0] - 1, a.shape[1] - 1)
    b = dct_coefficients(nonlinearity.value(dct_samples(a, n_fft)), n_fft)
    return lambda_grid(dims, params).mid * a + b[: dims[0] + 1, : dims[1] + 1]


def galerkin_jacobian(
    a: np.ndarray, params: ProblemParams, n_fft: IndexPair, nonlinearity=None, dims=None
) -> np.ndarray:
    """Float Jacobian of the Galerkin residual on ``I+_dims`` (default: the box of ``a``)."""
    nonlinearity = nonlinearity or ExponentialNonlinearity()
    dims = dims or (a.shape[0] - 1, a.shape[1] - 1)
    bprime = dct_coefficients(nonlinearity.derivative(dct_samples(a, n_fft)), n_fft)
    return assemble_DF(CoeffGrid(a), CoeffGrid(bprime), dims, params)


def _block_dims(dims: IndexPair, limit: int) -> IndexPair:
    scale = math.sqrt(limit / ((dims[0] + 1) * (dims[1] + 1)))
    return (
        max(0, min(dims[0], int((dims[0] + 1) * scale) - 1)),
        max(0, min(dims[1], int((dims[1] + 1) * scale) - 1)),
    )


def _newton_step(
    a: np.ndarray,
    residual: np.ndarray,
    params: ProblemParams,
    n_fft: IndexPair,
    nonlinearity,
    limit: int,
) -> Tuple[np.ndarray, bool]:
    """Solve ``DF step = -F``; boxes above ``limit`` unknowns use a block plus diagonal step."""
    dims = (a.shape[0] - 1, a.shape[1] - 1)
    if a.size <= limit:
        jacobian = galerkin_jacobian(a, params, n_fft, nonlinearity)
        return linalg.solve(jacobian, -residual.ravel()).reshape(a.shape), True

    block = _block_dims(dims, limit)
    rows, cols = block[0] + 1, block[1] + 1
    bprime = dct_coefficients(nonlinearity.derivative(dct_samples(a, n_fft)), n_fft)
    jacobian = assemble_DF(CoeffGrid(a), CoeffGrid(bprime), block, params)
    step = -residual / (lambda_grid(dims, params).mid + bprime[0, 0])
    inside = linalg.solve(jacobian, -residual[:rows, :cols].ravel())
    step[:rows, :cols] = inside.reshape(rows, cols)
    return step, False


def _sup(values: np.ndarray) -> float:
    return float(np.max(np.abs(values))) if values.size else 0.0


def newton_solve(
    params: ProblemParams,
    n_gal: IndexPair,
    cfg: Optional[SolveConfig] = None,
    guess: Optional[CoeffGrid] = None,
    nonlinearity=None,
    n_fft: Optional[IndexPair] = None,
) -> CoeffGrid:
    """Damped Newton iteration on the Galerkin truncation ``Pi^{N_gal} F``.

    Args:
        params: Wave speed and frequencies
        n_gal: Galerkin box
        cfg: Solver settings
        guess: Starting coefficients, built from ``cfg.guess`` when omitted
        nonlinearity: ``ExponentialNonlinearity`` (default) or ``TaylorNonlinearity``
        n_fft: DCT mesh, ``mesh_for(n_gal)`` by default

    Returns:
        Coefficients with ``max |F_n| <= residual_tol`` on ``I+_{N_gal}``

    Raises:
        ConvergenceError: the tolerance was not reached or the Jacobian is singular
    """
    cfg = cfg or SolveConfig()
    nonlinearity = nonlinearity or ExponentialNonlinearity()
    n_fft = n_fft or mesh_for(n_gal, nonlinearity.order)
    if guess is None:
        guess = initial_guess(params, n_gal, cfg)
    a = guess.resized(n_gal).midpoints().copy()

    residual = galerkin_residual(a, params, n_fft, nonlinearity)
    res = _sup(residual)
    if not np.any(a) and res == 0.0:
        app_log.debug("Zero guess is an exact solution")
        return CoeffGrid(a)

    limit = int(cfg.dense_jacobian_limit)
    tol = float(cfg.residual_tol)
    for iteration in range(1, int(cfg.max_iters) + 1):
        if res <= tol:
            app_log.debug(f"Newton converged after {iteration - 1} steps, residual {res:.3e}")
            return CoeffGrid(a)
        try:
            step, exact = _newton_step(a, residual, params, n_fft, nonlinearity, limit)
        except (linalg.LinAlgError, ValueError) as e:
            raise ConvergenceError(f"Singular Jacobian at c={params.c}: {e}", res) from e

        t = float(cfg.damping)
        while True:
            trial = a + t * step
            trial_residual = galerkin_residual(trial, params, n_fft, nonlinearity)
            trial_res = _sup(trial_residual)
            if np.isfinite(trial_res) and (trial_res < res or t <= cfg.min_damping):
                break
            if t <= cfg.min_damping:
                raise ConvergenceError(f"Backtracking failed at c={params.c}", res)
            t *= 0.5

        if exact and t == 1.0 and res < 1e-4 and trial_res > max(0.5 * res, tol):
            app_log.warning(
                f"Newton convergence is not quadratic at c={params.c}: "
                f"{res:.3e} -> {trial_res:.3e}"
            )
        app_log.debug(f"Newton step {iteration}: residual {trial_res:.3e}, damping {t:g}")
        a, residual, res = trial, trial_residual, trial_res

    if res <= tol:
        return CoeffGrid(a)
    raise ConvergenceError(
        f"Newton did not converge in {cfg.max_iters} steps at c={params.c}, residual {res:.3e}",
        res,
    )


# ---- initial guesses ------------------------------------------------------------


def _peak_centers(kind: str, separation: float, half_period: float) -> List[float]:
    if kind == "one_peak":
        return [0.0]
    if kind == "two_peak":
        return [separation / 2.0]
    # one peak at the origin next to a two-peak pair around L1 / 2
    middle = half_period / 2.0
    return [0.0, middle - separation / 2.0, middle + separation / 2.0]


def bump_profile(
    params: ProblemParams,
    n_fft: IndexPair,
    centers: Sequence[float],
    amplitude: float,
    width: float,
) -> np.ndarray:
    """Bumps ``-amplitude exp(-((x1 - s)^2 + x2^2) / width^2)`` mirrored in ``x1``.

    Sampled on the DCT mesh ``x_j = pi k / (q_j N_fft_j)``, ``k = 0..N_fft_j``.
    """
    x1, x2 = (np.pi * np.arange(n_fft[j] + 1) / (params.q[j] * n_fft[j]) for j in range(2))
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    profile = np.zeros_like(X1)
    for center in centers:
        shifts = (center,) if center == 0 else (center, -center)
        for s in shifts:
            profile -= amplitude * np.exp(-((X1 - s) ** 2 + X2**2) / width**2)
    return profile


def initial_guess(
    params: ProblemParams, n_gal: IndexPair, cfg: SolveConfig, n_fft: Optional[IndexPair] = None
) -> CoeffGrid:
    """Initial coefficients on ``I+_{N_gal}`` from ``cfg.guess``."""
    if cfg.guess == "zero":
        return CoeffGrid.zeros(n_gal)
    if cfg.guess == "from_file":
        return load_coefficients(cfg.a_bar_file).resized(n_gal)
    n_fft = n_fft or mesh_for(n_gal)
    centers = _peak_centers(cfg.guess, float(cfg.separation), params.half_periods[0])
    samples = bump_profile(params, n_fft, centers, float(cfg.amplitude), float(cfg.width))
    coefficients = dct_coefficients(samples, n_fft)
    return CoeffGrid(coefficients[: n_gal[0] + 1, : n_gal[1] + 1])


# largest |u| on the mesh still taken for the zero solution
TRIVIAL_SUP_NORM = 1e-8


def solve(
    params: ProblemParams, n_gal: IndexPair, cfg: Optional[SolveConfig] = None, nonlinearity=None
) -> CoeffGrid:
    """Newton from the configured initial guess.

    With ``cfg.seed_c`` the guess is solved at that speed first and the solution
    is followed along the branch to ``params.c`` in steps of ``cfg.seed_step``.
    Close to ``c = sqrt(2)`` the waves are small and the bump guesses fall onto
    the zero solution otherwise.

    Raises:
        ConvergenceError: Newton or the seed branch failed, or a nontrivial
            guess ended on the zero solution
    """
    cfg = cfg or SolveConfig()
    nonlinearity = nonlinearity or ExponentialNonlinearity()
    seed = params if cfg.seed_c is None else params.with_speed(float(cfg.seed_c))
    a = newton_solve(seed, n_gal, cfg, initial_guess(seed, n_gal, cfg), nonlinearity)
    if abs(seed.c - params.c) > 1e-12:
        records = continuation(seed, params.c, float(cfg.seed_step), a, cfg, nonlinearity)
        last = records[-1]
        if not last.converged:
            raise ConvergenceError(
                f"Branch from the seed c={seed.c} stopped at c={last.c} before c={params.c}"
            )
        a = last.coeffs
        app_log.debug(f"Followed the seed c={seed.c} to c={params.c} in {len(records)} points")
    if cfg.guess != "zero" and sup_norm(a) <= TRIVIAL_SUP_NORM:
        raise ConvergenceError(
            f"Newton from the {cfg.guess} guess collapsed onto the zero solution at "
            f"c={params.c}; set seed_c to follow the branch from a larger wave",
            0.0,
        )
    return a


# ---- norms and continuation -----------------------------------------------------


def sup_norm(a: CoeffGrid, n_fft: Optional[IndexPair] = None) -> float:
    """Largest ``|u|`` on the DCT mesh, an estimate of the sup norm."""
    n_fft = n_fft or mesh_for(a.dims)
    return _sup(dct_samples(a.midpoints(), n_fft))


def ell1_norm(a: CoeffGrid) -> float:
    """``sum gamma_n |a_n|``, the l1 norm with ``nu = (1, 1)``."""
    n1, n2 = index_grid(a.dims)
    return float(np.sum(gamma(n1, n2) * np.abs(a.midpoints())))


@dataclass
class BranchRecord:
    c: float
    coeffs: CoeffGrid
    norm_inf: float
    norm_ell1: float
    converged: bool
    coeff_path: Optional[str] = None


def _record(c: float, a: CoeffGrid, converged: bool, n_fft: IndexPair) -> BranchRecord:
    return BranchRecord(float(c), a, sup_norm(a, n_fft), ell1_norm(a), converged)


def continuation(
    params: ProblemParams,
    c_end: float,
    step: float,
    base: CoeffGrid,
    cfg: Optional[SolveConfig] = None,
    nonlinearity=None,
    n_fft: Optional[IndexPair] = None,
    min_step: Optional[float] = None,
) -> List[BranchRecord]:
    """Natural continuation in ``c`` from ``params.c`` to ``c_end``.

    Each point starts Newton from the previous solution. A failed point halves
    the step; below ``min_step`` the branch stops and the failed speed is
    recorded with ``converged=False``.
    """
    cfg = cfg or SolveConfig()
    nonlinearity = nonlinearity or ExponentialNonlinearity()
    n_gal = base.dims
    n_fft = n_fft or mesh_for(n_gal, nonlinearity.order)
    min_step = float(get_setting("min_step", min_step))
    step = abs(float(step))
    direction = 1.0 if c_end >= params.c else -1.0

    c = params.c
    try:
        current = newton_solve(params, n_gal, cfg, base, nonlinearity, n_fft)
    except ConvergenceError as e:
        app_log.warning(f"Continuation base does not converge at c={c}: {e}")
        return [_record(c, base, False, n_fft)]
    records = [_record(c, current, True, n_fft)]

    while direction * (c_end - c) > 1e-12:
        c_next = c + direction * min(step, abs(c_end - c))
        try:
            solution = newton_solve(
                params.with_speed(c_next), n_gal, cfg, current, nonlinearity, n_fft
            )
        except ConvergenceError as e:
            step /= 2.0
            app_log.debug(f"Continuation step to c={c_next} failed ({e}), step -> {step:g}")
            if step < min_step:
                app_log.warning(f"Continuation stopped at c={c}, step below {min_step:g}")
                records.append(_record(c_next, current, False, n_fft))
                break
            continue
        c, current = c_next, solution
        records.append(_record(c, current, True, n_fft))
        app_log.debug(f"Branch point c={c:.6g} |u|_inf={records[-1].norm_inf:.6g}")
    return records


def write_branch_csv(
    path: str, records: Sequence[BranchRecord], coeff_dir: Optional[str] = None
) -> str:
    """Branch table ``c,norm_inf,norm_ell1,converged,coefficients``.

    With ``coeff_dir`` every record's coefficients are dumped next to the table.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["c", "norm_inf", "norm_ell1", "converged", "coefficients"])
            for k, record in enumerate(records):
                if coeff_dir is not None:
                    name = os.path.join(coeff_dir, f"a_bar_{k:04d}.csv")
                    record.coeff_path = write_coeff_csv(name, record.coeffs)
                writer.writerow(
                    [
                        repr(record.c),
                        repr(record.norm_inf),
                        repr(record.norm_ell1),
                        int(record.converged),
                        record.coeff_path or "",
                    ]
                )
    except OSError as e:
        app_log.exception(e)
        raise
    return path
