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

"""The suspension bridge problem in cosine coefficient space.

Traveling waves ``u(x1 - ct, x2)`` of the plate equation with exponential
nonlinearity solve ``F_n(a) = lambda_n a_n + G(a)_n = 0`` with
``lambda_n = (n1^2 q1^2 + n2^2 q2^2)^2 - c^2 n1^2 q1^2 + 1``. This module holds
the parameters, ``lambda``, the residual, the Jacobian and the approximate
inverse ``A`` (a dense block on ``I+_{N_jac}`` and ``1/lambda_n`` elsewhere).

The block has ``P = (N1_jac+1)(N2_jac+1)`` rows and takes ``8 P^2`` bytes.
"""

import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Tuple, Union

import numpy as np
from covalent._shared_files import logger
from scipy import linalg

from .coeffs import (
    CoeffGrid,
    IndexPair,
    NormParams,
    flat_indices,
    gamma,
    index_grid,
    outside_mask,
)
from .exceptions import ConstraintViolation
from .interval import Interval, iv_matmul, iv_max, iv_min
from .rigorous_dft import EnclosedCoeffs, is_power_of_two

app_log = logger.app_log
log_stack_info = logger.log_stack_info

Values = Union[np.ndarray, Interval]
Lookup = Callable[[np.ndarray, np.ndarray], Values]


@dataclass(frozen=True)
class ProblemParams:
    """Wave speed ``c`` and frequencies ``q`` (half periods ``L_j = pi / q_j``)."""

    c: float
    q: Tuple[float, float]

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ConstraintViolation("c>0", f"wave speed must be positive, got {self.c}")
        if len(self.q) != 2 or min(self.q) <= 0:
            raise ConstraintViolation("q>0", f"frequencies must be positive, got {self.q}")
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "q", (float(self.q[0]), float(self.q[1])))
        if self.c >= math.sqrt(2.0):
            app_log.warning(f"c={self.c} >= sqrt(2): no localized waves are expected")

    @property
    def half_periods(self) -> Tuple[float, float]:
        return math.pi / self.q[0], math.pi / self.q[1]

    def with_speed(self, c: float) -> "ProblemParams":
        return ProblemParams(c, self.q)


@dataclass(frozen=True)
class TruncationSet:
    """The seven truncation boxes of the proof, each an index pair."""

    n_gal: IndexPair
    n_jac: IndexPair
    n_alias: IndexPair
    n_fft: IndexPair
    n_col: IndexPair
    n_row: IndexPair
    n_tail: IndexPair

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if len(value) != 2 or min(value) < 0:
                raise ConstraintViolation(name, f"expected a nonnegative index pair, got {value}")
            object.__setattr__(self, name, (int(value[0]), int(value[1])))

    @classmethod
    def from_dict(cls, values: Dict) -> "TruncationSet":
        return cls(**{name: tuple(values[name]) for name in cls.__dataclass_fields__})

    def to_dict(self) -> Dict[str, list]:
        return {name: list(value) for name, value in asdict(self).items()}

    def validate(self, params: ProblemParams) -> None:
        """Check the ordering constraints between the boxes.

        Raises:
            ConstraintViolation: naming the first violated constraint
        """

        def at_least(big: IndexPair, small: IndexPair) -> bool:
            return big[0] >= small[0] and big[1] >= small[1]

        if not self.n_jac[0] > params.c / params.q[0]:
            try:
                lambda_min(self.n_jac, params)
            except ConstraintViolation:
                raise ConstraintViolation(
                    "N_jac1>c/q1",
                    f"N_jac={self.n_jac} needs N_jac1 > c/q1 = {params.c / params.q[0]:.4g} "
                    "so that lambda_n > 0 outside the block",
                ) from None
            app_log.warning(
                f"N_jac1={self.n_jac[0]} <= c/q1={params.c / params.q[0]:.4g}; "
                "lambda_n stays positive outside the block, continuing"
            )
        checks = (
            ("N_alias>=N_jac", at_least(self.n_alias, self.n_jac), "increase n_alias"),
            ("N_alias>=N_gal", at_least(self.n_alias, self.n_gal), "increase n_alias"),
            ("N_col>=N_jac", at_least(self.n_col, self.n_jac), "increase n_col"),
            ("N_row>=N_jac", at_least(self.n_row, self.n_jac), "increase n_row"),
            ("N_jac<=N_tail", at_least(self.n_tail, self.n_jac), "increase n_tail"),
            ("N_tail<=N_col", at_least(self.n_col, self.n_tail), "decrease n_tail or raise n_col"),
        )
        for name, ok, hint in checks:
            if not ok:
                raise ConstraintViolation(name, f"{hint} ({self})")
        if not all(is_power_of_two(n) for n in self.n_fft):
            raise ConstraintViolation("N_fft=2^k", f"n_fft={self.n_fft} must be powers of two")
        if not (self.n_fft[0] > self.n_alias[0] and self.n_fft[1] > self.n_alias[1]):
            raise ConstraintViolation("N_alias<N_fft", f"n_fft={self.n_fft} must exceed n_alias")
        if not (self.n_fft[0] > self.n_gal[0] and self.n_fft[1] > self.n_gal[1]):
            raise ConstraintViolation("N_fft>N_gal", f"n_fft={self.n_fft} must exceed n_gal")
        if self.n_fft[0] < 2 * self.n_alias[0] or self.n_fft[1] < 2 * self.n_alias[1]:
            app_log.warning(f"N_fft={self.n_fft} is not much larger than N_alias={self.n_alias}")


def lambda_n(n1, n2, params: ProblemParams) -> Interval:
    """Enclosure of ``lambda_n`` for index arrays."""
    t1 = (Interval(np.asarray(n1, dtype=np.float64)) * params.q[0]).sqr()
    t2 = (Interval(np.asarray(n2, dtype=np.float64)) * params.q[1]).sqr()
    c_square = Interval(params.c).sqr()
    return (t1 + t2).sqr() - c_square * t1 + 1.0


def lambda_grid(dims: IndexPair, params: ProblemParams) -> Interval:
    n1, n2 = index_grid(dims)
    return lambda_n(n1, n2, params)


def lambda_min(dims: IndexPair, params: ProblemParams) -> Interval:
    """Lower bound for ``lambda_n`` over every ``n`` outside ``I+_dims``.

    lambda grows in ``n2`` for fixed ``n1``. Along ``n2 = 0`` it falls until
    ``n1 q1 = c / sqrt(2)`` and grows after, and on a fixed row it grows once
    ``n1 > c/q1``. The minimum is therefore at ``(N1+1, 0)``, at the integers
    around ``c / (sqrt(2) q1)`` past ``N1``, or on the row ``n2 = N2+1``.

    Raises:
        ConstraintViolation: if the bound is not positive, named ``N1>c/q1``
            when ``N1`` sits below the threshold
    """
    threshold = params.c / params.q[0]
    turning = params.c / (math.sqrt(2.0) * params.q[0])
    columns = {dims[0] + 1, int(math.floor(turning)), int(math.ceil(turning))}
    columns = np.array(sorted(m for m in columns if m > dims[0]))
    i = np.arange(int(math.ceil(threshold)) + 1)
    candidates = Interval.concatenate(
        [
            lambda_n(columns, np.zeros_like(columns), params),
            lambda_n(i, np.full_like(i, dims[1] + 1), params),
        ]
    )
    result = iv_min(candidates)
    if not float(result.lo) > 0:
        name = "lambda_min>0" if dims[0] > threshold else "N1>c/q1"
        raise ConstraintViolation(name, f"lambda is not positive outside I+_{dims}")
    return result


def residual_F(
    a_bar: CoeffGrid, enclosed: EnclosedCoeffs, n1, n2, params: ProblemParams
) -> Interval:
    """Enclosure of ``F_n(a_bar) = lambda_n a_n + b_n`` at index arrays."""
    a_values = a_bar.lookup(n1, n2)
    return lambda_n(n1, n2, params) * a_values + enclosed.lookup(n1, n2)


def residual_grid(
    a_bar: CoeffGrid, enclosed: EnclosedCoeffs, dims: IndexPair, params: ProblemParams
) -> Interval:
    n1, n2 = index_grid(dims)
    return residual_F(a_bar, enclosed, n1, n2, params)


def reflection_kernel(
    lookup: Lookup, rows: Tuple[np.ndarray, np.ndarray], cols: Tuple[np.ndarray, np.ndarray]
) -> Values:
    """Matrix ``(gamma_k / 4) sum_i b_{|j - h_i(k)|}`` of the convolution with ``b``.

    This is the action of ``b *`` on the cosine basis: column ``k`` holds the
    coefficients of ``b * e_k``. The float and interval paths share it.
    """
    j1 = np.asarray(rows[0])[:, None]
    j2 = np.asarray(rows[1])[:, None]
    k1 = np.asarray(cols[0])[None, :]
    k2 = np.asarray(cols[1])[None, :]
    total = None
    for s1, s2 in ((1, 1), (-1, 1), (1, -1), (-1, -1)):
        term = lookup(np.abs(j1 - s1 * k1), np.abs(j2 - s2 * k2))
        total = term if total is None else total + term
    return total * (gamma(k1, k2) / 4.0)


def assemble_DF(
    a_bar: CoeffGrid,
    bprime: Union[EnclosedCoeffs, CoeffGrid, np.ndarray],
    n_jac: IndexPair,
    params: ProblemParams,
    rigorous: bool = False,
) -> Values:
    """Jacobian ``lambda_j delta_jk + (gamma_k/4) sum_i b'_{|j - h_i(k)|}`` on ``I+_{N_jac}``.

    Args:
        a_bar: Profile, only used for its size
        bprime: Coefficients of ``G'(u_bar)``; enclosures or a float grid
        n_jac: Block size
        params: Problem parameters
        rigorous: With enclosures, return an interval matrix instead of midpoints

    Returns:
        Dense ``P x P`` matrix in flat index order
    """
    if isinstance(bprime, EnclosedCoeffs):
        lookup = bprime.lookup if rigorous else CoeffGrid(bprime.midpoints()).lookup
    else:
        grid = bprime if isinstance(bprime, CoeffGrid) else CoeffGrid(bprime)
        lookup = grid.lookup
    index = flat_indices(n_jac)
    toeplitz = reflection_kernel(lookup, index, index)
    lam = lambda_n(*index, params)
    if isinstance(toeplitz, Interval):
        diagonal = Interval(np.diag(lam.lo), np.diag(lam.hi))
        return toeplitz + diagonal
    return toeplitz + np.diag(lam.mid)


@dataclass
class OperatorA:
    """Approximate inverse of ``DF(a_bar)``: dense block plus the diagonal tail ``1/lambda_n``."""

    block: np.ndarray
    n_jac: IndexPair
    params: ProblemParams

    def __post_init__(self) -> None:
        size = (self.n_jac[0] + 1) * (self.n_jac[1] + 1)
        if self.block.shape != (size, size):
            raise ValueError(f"Block must be {size}x{size}, got {self.block.shape}")
        if not np.all(np.isfinite(self.block)):
            raise ConstraintViolation("A finite", "approximate inverse has NaN or inf entries")

    @classmethod
    def from_jacobian(cls, jacobian: np.ndarray, n_jac: IndexPair, params: ProblemParams):
        """Float inverse of the Jacobian block; rigor enters through the Z bound only."""
        app_log.debug(f"Inverting {jacobian.shape[0]}x{jacobian.shape[1]} Jacobian block")
        return cls(linalg.inv(jacobian), tuple(n_jac), params)

    @property
    def memory_bytes(self) -> int:
        return self.block.nbytes


def apply_A(A: OperatorA, v: CoeffGrid) -> CoeffGrid:
    """``A v``: the block acts on ``I+_{N_jac}``, ``1/lambda_n`` scales everything else."""
    dims = (max(v.dims[0], A.n_jac[0]), max(v.dims[1], A.n_jac[1]))
    v = v.resized(dims)
    inside = v.resized(A.n_jac)
    tail = outside_mask(dims, A.n_jac)
    lam = lambda_grid(dims, A.params)[tail]
    block = (slice(0, A.n_jac[0] + 1), slice(0, A.n_jac[1] + 1))
    shape = (A.n_jac[0] + 1, A.n_jac[1] + 1)
    if v.is_interval:
        out = v.values.copy()
        out[tail] = v.values[tail] / lam
        out[block] = iv_matmul(A.block, inside.flat()).reshape(*shape)
        return CoeffGrid(out)
    out = v.values.copy()
    out[tail] = v.values[tail] / lam.mid
    out[block] = (A.block @ inside.flat()).reshape(*shape)
    return CoeffGrid(out)


def column_weighted_sums(matrix: np.ndarray, dims: IndexPair, w: NormParams) -> Interval:
    """Enclosures of ``sum_n |M_nk| omega_n`` per column ``k`` of a block on ``I+_dims``."""
    omega = w.weights(dims).ravel()
    return iv_matmul(np.abs(matrix).T, omega)


def norm_A(A: OperatorA, w: NormParams) -> Interval:
    """Weighted l1 operator norm of ``A``.

    ``max(max_k sum_n |A_nk| omega_n / omega_k, 1 / lambda_min(N_jac))``
    """
    omega = w.weights(A.n_jac).ravel()
    block_norm = iv_max(column_weighted_sums(A.block, A.n_jac, w) / omega)
    tail_norm = 1.0 / lambda_min(A.n_jac, A.params)
    lo = max(float(block_norm.lo), float(tail_norm.lo))
    hi = max(float(block_norm.hi), float(tail_norm.hi))
    return Interval(lo, hi)
