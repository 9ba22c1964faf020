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

"""Cosine coefficient grids, the weighted l1 norm and the reflection bookkeeping.

A grid stores ``a_n`` for ``n`` in ``I+_N = {0..N1} x {0..N2}``. The function it
represents is ``u = sum_{n in Z^2} a_{|n|} exp(i n.y) = sum_{n in I+} gamma_n a_n
cos(n1 y1) cos(n2 y2)`` with ``y = q x``. Storage is row-major with ``n2``
fastest, and matrix blocks use ``flat(n) = n1 * (N2 + 1) + n2``.
"""

from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np
from scipy import signal

from .exceptions import ConstraintViolation
from .interval import Interval, iv_exp, iv_log, iv_sum

IndexPair = Tuple[int, int]
Values = Union[np.ndarray, Interval]

FLAT_INDEX_LAYOUT = "row-major-n2-fastest"

# h_1..h_4, the sign patterns of the four reflections of an index pair.
REFLECTIONS = ((1, 1), (-1, 1), (1, -1), (-1, -1))


def gamma(n1, n2) -> np.ndarray:
    """Symmetry weight 1, 2 or 4 of index pairs (vectorized)."""
    n1 = np.asarray(n1)
    n2 = np.asarray(n2)
    return np.left_shift(1, (n1 != 0).astype(int) + (n2 != 0).astype(int))


def index_grid(dims: IndexPair) -> Tuple[np.ndarray, np.ndarray]:
    """Row and column index arrays of ``I+_dims`` in storage order."""
    return np.meshgrid(np.arange(dims[0] + 1), np.arange(dims[1] + 1), indexing="ij")


def flat_indices(dims: IndexPair) -> Tuple[np.ndarray, np.ndarray]:
    """``(n1, n2)`` of every flat position of ``I+_dims``."""
    n1, n2 = index_grid(dims)
    return n1.ravel(), n2.ravel()


def flat(n1, n2, dims: IndexPair):
    return np.asarray(n1) * (dims[1] + 1) + np.asarray(n2)


def outside_mask(dims: IndexPair, inner: IndexPair) -> np.ndarray:
    """Boolean grid over ``I+_dims`` selecting indices not in ``I+_inner``."""
    n1, n2 = index_grid(dims)
    return (n1 > inner[0]) | (n2 > inner[1])


@dataclass(frozen=True)
class NormParams:
    """Geometric weights of the l1_nu norm, ``omega_n = gamma_n nu1^n1 nu2^n2``."""

    nu: Tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        if len(self.nu) != 2 or min(self.nu) < 1.0:
            raise ConstraintViolation("nu>=1", f"weights must satisfy nu >= (1,1), got {self.nu}")
        object.__setattr__(self, "nu", (float(self.nu[0]), float(self.nu[1])))

    def log_nu(self) -> Tuple[Interval, Interval]:
        return iv_log(Interval(self.nu[0])), iv_log(Interval(self.nu[1]))

    def axis_powers(self, count: int, axis: int) -> Interval:
        """Enclosures of ``nu_axis**k`` for ``k = 0..count``."""
        log_nu = self.log_nu()[axis]
        return iv_exp(Interval(np.arange(count + 1, dtype=np.float64)) * log_nu)

    def weights(self, dims: IndexPair) -> Interval:
        """Interval grid of ``omega_n`` over ``I+_dims``."""
        p1 = self.axis_powers(dims[0], 0).reshape(-1, 1)
        p2 = self.axis_powers(dims[1], 1).reshape(1, -1)
        n1, n2 = index_grid(dims)
        return p1 * p2 * gamma(n1, n2).astype(np.float64)


class CoeffGrid:
    """Immutable grid of cosine coefficients, real or interval valued.

    Args:
        values: Array of shape ``(N1+1, N2+1)`` or an ``Interval`` of that shape
    """

    def __init__(self, values: Values) -> None:
        if isinstance(values, Interval):
            if values.ndim != 2:
                raise ValueError("Coefficient grids are two dimensional")
            values = values.copy()
            values.lo.setflags(write=False)
            values.hi.setflags(write=False)
        else:
            values = np.array(values, dtype=np.float64)
            if values.ndim != 2:
                raise ValueError("Coefficient grids are two dimensional")
            values.setflags(write=False)
        self.values = values

    @classmethod
    def zeros(cls, dims: IndexPair) -> "CoeffGrid":
        return cls(np.zeros((dims[0] + 1, dims[1] + 1)))

    @classmethod
    def unit(cls, k: IndexPair, dims: IndexPair = None) -> "CoeffGrid":
        dims = dims or k
        values = np.zeros((dims[0] + 1, dims[1] + 1))
        values[k] = 1.0
        return cls(values)

    @property
    def dims(self) -> IndexPair:
        shape = self.values.shape
        return shape[0] - 1, shape[1] - 1

    @property
    def is_interval(self) -> bool:
        return isinstance(self.values, Interval)

    @property
    def size(self) -> int:
        return (self.dims[0] + 1) * (self.dims[1] + 1)

    def midpoints(self) -> np.ndarray:
        return self.values.mid if self.is_interval else np.array(self.values)

    def as_interval(self) -> Interval:
        return self.values.copy() if self.is_interval else Interval(self.values)

    def flat(self) -> Values:
        return self.values.ravel() if self.is_interval else self.values.ravel().copy()

    def resized(self, dims: IndexPair) -> "CoeffGrid":
        """Zero-pad or truncate to ``I+_dims``."""
        rows = min(dims[0], self.dims[0]) + 1
        cols = min(dims[1], self.dims[1]) + 1
        if self.is_interval:
            out = Interval.zeros((dims[0] + 1, dims[1] + 1))
            out[:rows, :cols] = self.values[:rows, :cols]
        else:
            out = np.zeros((dims[0] + 1, dims[1] + 1))
            out[:rows, :cols] = self.values[:rows, :cols]
        return CoeffGrid(out)

    def lookup(self, i1, i2) -> Values:
        """Vectorized read of ``a_{|i|}`` with zeros outside the stored box."""
        i1 = np.abs(np.asarray(i1))
        i2 = np.abs(np.asarray(i2))
        inside = (i1 <= self.dims[0]) & (i2 <= self.dims[1])
        c1 = np.minimum(i1, self.dims[0])
        c2 = np.minimum(i2, self.dims[1])
        if self.is_interval:
            picked = self.values[c1, c2]
            return Interval(np.where(inside, picked.lo, 0.0), np.where(inside, picked.hi, 0.0))
        return np.where(inside, self.values[c1, c2], 0.0)

    def support_dims(self) -> IndexPair:
        """Smallest box ``I+_M`` outside of which all entries are zero."""
        values = self.values
        nonzero = (values.lo != 0) | (values.hi != 0) if self.is_interval else values != 0
        rows = np.nonzero(nonzero.any(axis=1))[0]
        cols = np.nonzero(nonzero.any(axis=0))[0]
        if rows.size == 0:
            return 0, 0
        return int(rows[-1]), int(cols[-1])

    def __repr__(self) -> str:
        kind = "interval" if self.is_interval else "float"
        return f"CoeffGrid(dims={self.dims}, {kind})"


def norm_ell1_nu(a: CoeffGrid, w: NormParams) -> Interval:
    """Enclosure of ``sum_n gamma_n nu^n |a_n|`` over the stored grid."""
    weighted = a.as_interval().abs() * w.weights(a.dims)
    return iv_sum(weighted)


def full_symmetric(values: Values) -> Values:
    """Expand a quadrant ``a_n`` to the array of ``a_{|m|}`` over ``-N..N``."""
    n1 = values.shape[0] - 1
    n2 = values.shape[1] - 1
    i1 = np.abs(np.arange(-n1, n1 + 1))
    i2 = np.abs(np.arange(-n2, n2 + 1))
    return values[np.ix_(i1, i2)]


def convolve(a: CoeffGrid, b: CoeffGrid) -> CoeffGrid:
    """Discrete convolution ``(a*b)_n = sum_{m in Z^2} a_{|m|} b_{|n-m|}``.

    Float grids go through ``scipy.signal.convolve``. Interval grids are summed
    exactly term by term with outward rounding, looping over the nonzero entries
    of the operand with the smaller support; this is O(N^4) and is meant for
    moderate sizes.
    """
    dims = (a.dims[0] + b.dims[0], a.dims[1] + b.dims[1])
    rows, cols = dims[0] + 1, dims[1] + 1
    if not a.is_interval and not b.is_interval:
        full = signal.convolve(full_symmetric(a.values), full_symmetric(b.values), method="auto")
        return CoeffGrid(full[dims[0] :, dims[1] :])

    small, large = (a, b) if a.size <= b.size else (b, a)
    small_full = full_symmetric(small.as_interval())
    large_full = full_symmetric(large.as_interval())
    s1, s2 = small.dims
    l1, l2 = large.dims
    # Output positions n >= 0 receive large_{n - m}; the window below holds n - m for n in I+_dims.
    acc = Interval.zeros((rows, cols))
    nonzero = (small_full.lo != 0) | (small_full.hi != 0)
    for m1, m2 in zip(*np.nonzero(nonzero)):
        shift1 = m1 - s1
        shift2 = m2 - s2
        lo1 = max(0, shift1 - l1)
        hi1 = min(rows - 1, shift1 + l1)
        lo2 = max(0, shift2 - l2)
        hi2 = min(cols - 1, shift2 + l2)
        if lo1 > hi1 or lo2 > hi2:
            continue
        window = large_full[
            lo1 - shift1 + l1 : hi1 - shift1 + l1 + 1, lo2 - shift2 + l2 : hi2 - shift2 + l2 + 1
        ]
        target = (slice(lo1, hi1 + 1), slice(lo2, hi2 + 1))
        acc[target] = acc[target] + window * small_full[m1, m2]
    return CoeffGrid(acc)


def reflect_sum(f: Callable[[np.ndarray, np.ndarray], Values], dims: IndexPair) -> Values:
    """Sum of ``f`` over the box ``|k| <= dims`` in Z^2 via the quadrant rewriting.

    ``sum_{k in Z^2} f(k) = sum_{n in I+} gamma_n / 4 sum_i f(h_i(n))``; at
    ``n = (0,0)`` the four reflections coincide and the weight 1/4 counts it once.
    """
    n1, n2 = flat_indices(dims)
    total = None
    for s1, s2 in REFLECTIONS:
        term = f(s1 * n1, s2 * n2)
        total = term if total is None else total + term
    scale = gamma(n1, n2) / 4.0
    weighted = total * scale
    if isinstance(weighted, Interval):
        return iv_sum(weighted)
    return float(np.sum(weighted))


def evaluate_u(a: CoeffGrid, q: Tuple[float, float], x1, x2) -> np.ndarray:
    """Point evaluation of ``u`` at physical coordinates ``x`` (broadcast together).

    Interval grids are evaluated at their midpoints, this is a plotting tool.
    """
    x1, x2 = (np.asarray(x, dtype=np.float64) for x in np.broadcast_arrays(x1, x2))
    values = a.midpoints()
    n1, n2 = index_grid(a.dims)
    weighted = values * gamma(n1, n2)
    c1 = np.cos(np.multiply.outer(x1.ravel() * q[0], np.arange(a.dims[0] + 1)))
    c2 = np.cos(np.multiply.outer(x2.ravel() * q[1], np.arange(a.dims[1] + 1)))
    return np.einsum("pi,ij,pj->p", c1, weighted, c2).reshape(x1.shape)
