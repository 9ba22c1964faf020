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

"""Outward-rounded interval and complex-interval arithmetic on numpy arrays.

Every result is computed in the default round-to-nearest mode and then widened
by one ulp in the outward direction (``numpy.nextafter``). Additions detect
exact results with an error-free transformation and skip the widening there.
Nothing touches the FPU rounding mode, so all functions are safe to call from
several threads at once and give bit-identical results in any order.

An ``Interval`` holds two float64 arrays of the same shape, so a scalar is a
0-d interval and a coefficient grid is a 2-d one.
"""

from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import IntervalDivisionError, IntervalError

Number = Union[float, int, np.ndarray]

_U = 2.0**-53
_ETA = float(np.nextafter(0.0, 1.0))

# libm exp/log/sin/cos are accurate to below one ulp on the supported
# platforms, enclosures of elementary functions are widened by this many ulps.
ELEMENTARY_ULPS = 2


def _down(x: np.ndarray) -> np.ndarray:
    return np.nextafter(x, -np.inf)


def _up(x: np.ndarray) -> np.ndarray:
    return np.nextafter(x, np.inf)


def _widen(lo: np.ndarray, hi: np.ndarray, ulps: int) -> Tuple[np.ndarray, np.ndarray]:
    for _ in range(ulps):
        lo = _down(lo)
        hi = _up(hi)
    return lo, hi


def _two_sum(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _add_down(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        s, err = _two_sum(a, b)
        return np.where(err >= 0, s, _down(s))


def _add_up(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        s, err = _two_sum(a, b)
        return np.where(err <= 0, s, _up(s))


_SPLITTER = 134217729.0  # 2**27 + 1
# Dekker's product error is exact only away from overflow and underflow.
_TRUSTED_MIN = 2.0**-960
_TRUSTED_MAX = 2.0**990


def _two_prod_err(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    ca = _SPLITTER * a
    a_hi = ca - (ca - a)
    a_lo = a - a_hi
    cb = _SPLITTER * b
    b_hi = cb - (cb - b)
    b_lo = b - b_hi
    return ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo


def _mul_directed(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Lower and upper bounds of the real product ``a*b`` of float arrays.

    ``0*inf`` is taken as 0, the endpoint convention of the extended reals.
    """
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        p = a * b
        err = _two_prod_err(a, b, p)
        zero = (a == 0) | (b == 0)
        magnitude = np.abs(p)
        trusted = (magnitude > _TRUSTED_MIN) & (magnitude < _TRUSTED_MAX) & np.isfinite(err)
        lo = np.where(zero, 0.0, np.where(trusted & (err >= 0), p, _down(p)))
        hi = np.where(zero, 0.0, np.where(trusted & (err <= 0), p, _up(p)))
    return lo, hi


def accumulation_factor(n: int) -> float:
    """Upper bound for the relative error of a float sum of ``n`` terms."""
    n = max(int(n), 1)
    return float(_up(np.float64(2.0 * (n + 1) * _U)))


def _as_array(x: Number) -> np.ndarray:
    return np.array(x, dtype=np.float64)


class Interval:
    """Closed real interval ``[lo, hi]`` with array-valued endpoints.

    Args:
        lo: Lower endpoint(s)
        hi: Upper endpoint(s), defaults to ``lo`` for point intervals
    """

    __slots__ = ("lo", "hi")
    # Let ndarray <op> Interval dispatch to the reflected Interval method.
    __array_ufunc__ = None

    def __init__(self, lo: Number, hi: Optional[Number] = None) -> None:
        lo = _as_array(lo)
        hi = lo.copy() if hi is None else _as_array(hi)
        if lo.shape != hi.shape:
            lo, hi = (np.array(v) for v in np.broadcast_arrays(lo, hi))
        if not np.all(lo <= hi):
            raise IntervalError("Empty or NaN interval encountered")
        self.lo = lo
        self.hi = hi

    # ---- construction -------------------------------------------------------

    @classmethod
    def zeros(cls, shape: Union[int, Tuple[int, ...]]) -> "Interval":
        return cls(np.zeros(shape), np.zeros(shape))

    @classmethod
    def _unchecked(cls, lo: np.ndarray, hi: np.ndarray) -> "Interval":
        obj = cls.__new__(cls)
        obj.lo = lo
        obj.hi = hi
        if not np.all(lo <= hi):
            raise IntervalError("Empty or NaN interval encountered")
        return obj

    @staticmethod
    def coerce(x: Union["Interval", Number]) -> "Interval":
        return x if isinstance(x, Interval) else Interval(x)

    @classmethod
    def concatenate(cls, parts: Sequence["Interval"], axis: int = 0) -> "Interval":
        return cls._unchecked(
            np.concatenate([p.lo for p in parts], axis=axis),
            np.concatenate([p.hi for p in parts], axis=axis),
        )

    # ---- array protocol -----------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.lo.shape

    @property
    def ndim(self) -> int:
        return self.lo.ndim

    @property
    def size(self) -> int:
        return self.lo.size

    def __len__(self) -> int:
        return len(self.lo)

    def __getitem__(self, key) -> "Interval":
        return Interval._unchecked(self.lo[key], self.hi[key])

    def __setitem__(self, key, value: Union["Interval", Number]) -> None:
        value = Interval.coerce(value)
        self.lo[key] = value.lo
        self.hi[key] = value.hi

    def reshape(self, *shape) -> "Interval":
        return Interval._unchecked(self.lo.reshape(*shape), self.hi.reshape(*shape))

    def ravel(self) -> "Interval":
        return self.reshape(-1)

    def moveaxis(self, source: int, destination: int) -> "Interval":
        return Interval._unchecked(
            np.moveaxis(self.lo, source, destination), np.moveaxis(self.hi, source, destination)
        )

    @property
    def T(self) -> "Interval":
        return Interval._unchecked(self.lo.T, self.hi.T)

    def copy(self) -> "Interval":
        return Interval._unchecked(self.lo.copy(), self.hi.copy())

    def __repr__(self) -> str:
        if self.ndim == 0:
            return format_interval(self)
        return f"Interval(shape={self.shape})"

    # ---- derived quantities -------------------------------------------------

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * self.lo + 0.5 * self.hi

    def midrad(self) -> Tuple[np.ndarray, np.ndarray]:
        """Midpoint and an upward-rounded radius covering the interval."""
        mid = self.mid
        rad = _up(np.maximum(self.hi - mid, mid - self.lo))
        return mid, rad

    @property
    def width(self) -> np.ndarray:
        return _up(self.hi - self.lo)

    @property
    def mag(self) -> np.ndarray:
        """Upper bound of ``|x|`` over the interval."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    @property
    def mig(self) -> np.ndarray:
        """Lower bound of ``|x|`` over the interval."""
        straddles = (self.lo <= 0) & (self.hi >= 0)
        return np.where(straddles, 0.0, np.minimum(abs(self.lo), abs(self.hi)))

    def contains(self, x: Number) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (self.lo <= x) & (x <= self.hi)

    def is_subset(self, other: "Interval") -> np.ndarray:
        return (other.lo <= self.lo) & (self.hi <= other.hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval._unchecked(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    # ---- arithmetic ---------------------------------------------------------

    def __neg__(self) -> "Interval":
        return Interval._unchecked(-self.hi, -self.lo)

    def __add__(self, other: Union["Interval", Number]) -> "Interval":
        other = Interval.coerce(other)
        return Interval._unchecked(_add_down(self.lo, other.lo), _add_up(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other: Union["Interval", Number]) -> "Interval":
        other = Interval.coerce(other)
        return Interval._unchecked(_add_down(self.lo, -other.hi), _add_up(self.hi, -other.lo))

    def __rsub__(self, other: Number) -> "Interval":
        return Interval.coerce(other) - self

    def __mul__(self, other: Union["Interval", Number]) -> "Interval":
        other = Interval.coerce(other)
        if np.array_equal(self.lo, self.hi) and np.array_equal(other.lo, other.hi):
            lo, hi = _mul_directed(self.lo, other.lo)
            return Interval._unchecked(lo, hi)
        corners = (
            _mul_directed(self.lo, other.lo),
            _mul_directed(self.lo, other.hi),
            _mul_directed(self.hi, other.lo),
            _mul_directed(self.hi, other.hi),
        )
        lo = np.min(np.stack([corner[0] for corner in corners]), axis=0)
        hi = np.max(np.stack([corner[1] for corner in corners]), axis=0)
        return Interval._unchecked(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["Interval", Number]) -> "Interval":
        other = Interval.coerce(other)
        if not np.all((other.lo > 0) | (other.hi < 0)):
            raise IntervalDivisionError("Division by an interval containing zero")
        with np.errstate(over="ignore"):
            quotients = np.stack(
                np.broadcast_arrays(
                    self.lo / other.lo, self.lo / other.hi, self.hi / other.lo, self.hi / other.hi
                )
            )
        exact = (self.lo == 0) & (self.hi == 0)
        return Interval._unchecked(
            np.where(exact, 0.0, _down(quotients.min(axis=0))),
            np.where(exact, 0.0, _up(quotients.max(axis=0))),
        )

    def __rtruediv__(self, other: Number) -> "Interval":
        return Interval.coerce(other) / self

    def __pow__(self, exponent: int) -> "Interval":
        if int(exponent) != exponent or exponent < 0:
            raise ValueError("Only nonnegative integer powers are supported")
        exponent = int(exponent)
        if exponent == 0:
            return Interval(np.ones(self.shape))
        result = self.sqr() if exponent % 2 == 0 else self
        base = self.sqr()
        remaining = exponent // 2 - (1 if exponent % 2 == 0 else 0)
        for _ in range(remaining):
            result = result * base
        return result

    def abs(self) -> "Interval":
        return Interval._unchecked(self.mig, self.mag)

    def sqr(self) -> "Interval":
        lo, _ = _mul_directed(self.mig, self.mig)
        _, hi = _mul_directed(self.mag, self.mag)
        return Interval._unchecked(np.maximum(lo, 0.0), hi)

    def sqrt(self) -> "Interval":
        if np.any(self.lo < 0):
            raise IntervalError("Square root of an interval with negative part")
        lo = np.sqrt(self.lo)
        hi = np.sqrt(self.hi)
        # sqrt is correctly rounded, an endpoint is kept when its square brackets the input.
        _, lo_square_hi = _mul_directed(lo, lo)
        hi_square_lo, _ = _mul_directed(hi, hi)
        return Interval._unchecked(
            np.where(lo_square_hi <= self.lo, lo, np.maximum(_down(lo), 0.0)),
            np.where(hi_square_lo >= self.hi, hi, _up(hi)),
        )

    def exp(self) -> "Interval":
        return iv_exp(self)

    def log(self) -> "Interval":
        return iv_log(self)

    def cos(self) -> "Interval":
        return iv_trig(self, "cos")

    def sin(self) -> "Interval":
        return iv_trig(self, "sin")

    def sum(self, axis: Optional[int] = None) -> "Interval":
        return iv_sum(self, axis=axis)


PI = Interval(np.pi, np.nextafter(np.pi, np.inf))
HALF_PI = PI * 0.5
TWO_PI = PI * 2.0


def iv_arith(x: Interval, y: Interval, kind: str) -> Interval:
    """Interval ``add``, ``sub``, ``mul`` or ``div`` with outward rounding."""
    operations = {
        "add": Interval.__add__,
        "sub": Interval.__sub__,
        "mul": Interval.__mul__,
        "div": Interval.__truediv__,
    }
    try:
        operation = operations[kind]
    except KeyError:
        raise ValueError(f"Unknown interval operation: {kind}") from None
    return operation(Interval.coerce(x), Interval.coerce(y))


def iv_exp(x: Interval) -> Interval:
    """Enclosure of ``exp`` over ``x``. Overflow yields ``hi = +inf``."""
    x = Interval.coerce(x)
    with np.errstate(over="ignore"):
        lo, hi = _widen(np.exp(x.lo), np.exp(x.hi), ELEMENTARY_ULPS)
    lo = np.where(x.lo == 0, 1.0, np.maximum(lo, 0.0))
    hi = np.where(x.hi == 0, 1.0, hi)
    return Interval._unchecked(lo, hi)


def iv_log(x: Interval) -> Interval:
    x = Interval.coerce(x)
    if np.any(x.lo <= 0):
        raise IntervalError("Logarithm of an interval with nonpositive part")
    lo, hi = _widen(np.log(x.lo), np.log(x.hi), ELEMENTARY_ULPS)
    lo = np.where(x.lo == 1, 0.0, lo)
    hi = np.where(x.hi == 1, 0.0, hi)
    return Interval._unchecked(lo, hi)


def _contains_integers(t: Interval) -> Tuple[np.ndarray, np.ndarray]:
    """Whether ``t`` may contain an even, respectively odd, integer."""
    first = np.ceil(t.lo)
    has_any = first <= t.hi
    first_even = np.mod(first, 2) == 0
    has_two = first + 1 <= t.hi
    return has_any & (first_even | has_two), has_any & (~first_even | has_two)


def iv_trig(x: Interval, kind: str) -> Interval:
    """Enclosure of ``sin`` or ``cos`` over ``x``, valid across period boundaries.

    Extrema are located by dividing the endpoints by the rigorous enclosure of pi,
    so an interval that possibly touches ``k*pi`` (cos) or ``pi/2 + k*pi`` (sin)
    is assigned the corresponding +-1 bound.
    """
    x = Interval.coerce(x)
    if kind == "cos":
        func = np.cos
        # cos has maxima at 2k*pi and minima at (2k+1)*pi
        shift = 0.0
    elif kind == "sin":
        func = np.sin
        shift = 0.5
    else:
        raise ValueError(f"Unknown trigonometric function: {kind}")

    with np.errstate(invalid="ignore"):
        end_lo = func(x.lo)
        end_hi = func(x.hi)
    lo, hi = _widen(np.minimum(end_lo, end_hi), np.maximum(end_lo, end_hi), ELEMENTARY_ULPS)

    t = Interval._unchecked(
        (Interval(x.lo) / PI - shift).lo,
        (Interval(x.hi) / PI - shift).hi,
    )
    has_max, has_min = _contains_integers(t)
    hi = np.where(has_max, 1.0, np.minimum(hi, 1.0))
    lo = np.where(has_min, -1.0, np.maximum(lo, -1.0))

    wide = ~np.isfinite(x.lo) | ~np.isfinite(x.hi) | (x.hi - x.lo >= float(TWO_PI.lo))
    lo = np.where(wide, -1.0, lo)
    hi = np.where(wide, 1.0, hi)

    point_zero = (x.lo == 0) & (x.hi == 0)
    exact = 1.0 if kind == "cos" else 0.0
    return Interval._unchecked(np.where(point_zero, exact, lo), np.where(point_zero, exact, hi))


def iv_sum(x: Interval, axis: Optional[int] = None) -> Interval:
    """Rigorous sum of interval entries in a fixed (numpy pairwise) order."""
    n = x.size if axis is None else x.shape[axis]
    lo = np.sum(x.lo, axis=axis)
    hi = np.sum(x.hi, axis=axis)
    if n <= 1:
        return Interval._unchecked(np.asarray(lo), np.asarray(hi))
    factor = accumulation_factor(n)
    err_lo = _up(factor * np.sum(np.abs(x.lo), axis=axis))
    err_hi = _up(factor * np.sum(np.abs(x.hi), axis=axis))
    return Interval._unchecked(_down(lo - err_lo), _up(hi + err_hi))


def iv_min(x: Interval, axis: Optional[int] = None) -> Interval:
    return Interval._unchecked(np.min(x.lo, axis=axis), np.min(x.hi, axis=axis))


def iv_max(x: Interval, axis: Optional[int] = None) -> Interval:
    return Interval._unchecked(np.max(x.lo, axis=axis), np.max(x.hi, axis=axis))


def iv_powers(base: Interval, n_max: int) -> Interval:
    """Enclosures of ``base**k`` for ``k = 0..n_max`` by repeated multiplication."""
    base = Interval.coerce(base)
    lo = np.empty(n_max + 1)
    hi = np.empty(n_max + 1)
    current = Interval(1.0)
    for k in range(n_max + 1):
        lo[k] = current.lo
        hi[k] = current.hi
        current = current * base
    return Interval._unchecked(lo, hi)


def iv_matmul(matrix: np.ndarray, x: Union[Interval, np.ndarray]) -> Interval:
    """Enclosure of ``matrix @ x`` for a float matrix and an interval vector/matrix.

    Uses midpoint-radius form: the float product of the midpoints plus the
    radius propagated through ``|matrix|`` plus an a priori bound on the
    rounding error of every dot product (relative ``accumulation_factor`` of the
    absolute product and an underflow term per summand).
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    x = Interval.coerce(x)
    mid, rad = x.midrad()
    n = matrix.shape[-1]
    factor = accumulation_factor(n + 2)
    abs_matrix = np.abs(matrix)
    center = matrix @ mid
    rounding = abs_matrix @ np.abs(mid)
    spread = abs_matrix @ rad
    radius = _up(_up(factor * rounding) + _up(spread * (1.0 + factor)) + 2 * n * _ETA)
    return Interval._unchecked(_down(center - radius), _up(center + radius))


def upper_matvec(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Upward-rounded ``matrix @ vector`` for entrywise nonnegative operands."""
    n = np.shape(matrix)[-1]
    factor = accumulation_factor(n)
    return _up((matrix @ vector) * (1.0 + factor) + n * _ETA)


def upper_sum(values: np.ndarray, axis: Optional[int] = None) -> np.ndarray:
    """Upward-rounded sum of nonnegative floats."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size if axis is None else values.shape[axis]
    return _up(np.sum(values, axis=axis) * (1.0 + accumulation_factor(n)))


def next_up(x: Number) -> np.ndarray:
    """One ulp towards +inf."""
    return _up(np.asarray(x, dtype=np.float64))


def next_down(x: Number) -> np.ndarray:
    return _down(np.asarray(x, dtype=np.float64))


def upper_bound(x: Union[Interval, Number]) -> Union[float, np.ndarray]:
    """Return the upper endpoint, the rigorous value of a computed bound."""
    hi = Interval.coerce(x).hi
    return float(hi) if hi.ndim == 0 else hi


def format_interval(x: Interval) -> str:
    """Serialize a scalar interval as ``[lo,hi]``.

    ``repr`` of a float64 round-trips exactly, so the printed endpoints are the
    stored endpoints and the enclosure is preserved.
    """
    return f"[{float(x.lo)!r},{float(x.hi)!r}]"


def parse_interval(text: str) -> Interval:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError(f"Not an interval literal: {text!r}")
    lo, hi = body[1:-1].split(",")
    return Interval(float(lo), float(hi))


class ComplexInterval:
    """Rectangular complex enclosure ``re + i*im`` of interval arrays."""

    __slots__ = ("re", "im")
    __array_ufunc__ = None

    def __init__(self, re: Union[Interval, Number], im: Union[Interval, Number, None] = None):
        self.re = Interval.coerce(re)
        self.im = Interval.zeros(self.re.shape) if im is None else Interval.coerce(im)

    @classmethod
    def zeros(cls, shape: Union[int, Tuple[int, ...]]) -> "ComplexInterval":
        return cls(Interval.zeros(shape), Interval.zeros(shape))

    @staticmethod
    def coerce(z) -> "ComplexInterval":
        if isinstance(z, ComplexInterval):
            return z
        if isinstance(z, Interval):
            return ComplexInterval(z)
        z = np.asarray(z)
        if np.iscomplexobj(z):
            return ComplexInterval(Interval(z.real), Interval(z.imag))
        return ComplexInterval(Interval(z))

    @classmethod
    def concatenate(cls, parts: Sequence["ComplexInterval"], axis: int = 0) -> "ComplexInterval":
        return cls(
            Interval.concatenate([p.re for p in parts], axis=axis),
            Interval.concatenate([p.im for p in parts], axis=axis),
        )

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.re.shape

    def __getitem__(self, key) -> "ComplexInterval":
        return ComplexInterval(self.re[key], self.im[key])

    def __setitem__(self, key, value) -> None:
        value = ComplexInterval.coerce(value)
        self.re[key] = value.re
        self.im[key] = value.im

    def reshape(self, *shape) -> "ComplexInterval":
        return ComplexInterval(self.re.reshape(*shape), self.im.reshape(*shape))

    @property
    def T(self) -> "ComplexInterval":
        return ComplexInterval(self.re.T, self.im.T)

    def moveaxis(self, source: int, destination: int) -> "ComplexInterval":
        return ComplexInterval(
            self.re.moveaxis(source, destination), self.im.moveaxis(source, destination)
        )

    @property
    def mid(self) -> np.ndarray:
        return self.re.mid + 1j * self.im.mid

    def contains(self, z: Union[complex, np.ndarray]) -> np.ndarray:
        z = np.asarray(z)
        return self.re.contains(z.real) & self.im.contains(z.imag)

    def __neg__(self) -> "ComplexInterval":
        return ComplexInterval(-self.re, -self.im)

    def __add__(self, other) -> "ComplexInterval":
        other = ComplexInterval.coerce(other)
        return ComplexInterval(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other) -> "ComplexInterval":
        other = ComplexInterval.coerce(other)
        return ComplexInterval(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> "ComplexInterval":
        return ComplexInterval.coerce(other) - self

    def __mul__(self, other) -> "ComplexInterval":
        if isinstance(other, (Interval, float, int)) or (
            isinstance(other, np.ndarray) and not np.iscomplexobj(other)
        ):
            return ComplexInterval(self.re * other, self.im * other)
        other = ComplexInterval.coerce(other)
        return ComplexInterval(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conj(self) -> "ComplexInterval":
        return ComplexInterval(self.re, -self.im)

    def exp(self) -> "ComplexInterval":
        modulus = iv_exp(self.re)
        cos, sin = iv_trig(self.im, "cos"), iv_trig(self.im, "sin")
        return ComplexInterval(modulus * cos, modulus * sin)

    def abs_upper(self) -> np.ndarray:
        return cplx_abs_upper(self)


def expi(theta: Interval) -> ComplexInterval:
    """Enclosure of ``exp(i*theta)``."""
    return ComplexInterval(iv_trig(theta, "cos"), iv_trig(theta, "sin"))


def cplx_abs_upper(z: ComplexInterval) -> Union[float, np.ndarray]:
    """Upward-rounded bound of ``|w|`` over every ``w`` in the rectangle ``z``.

    The maximum modulus over a rectangle is attained at the corner with the
    largest absolute coordinates.
    """
    a = z.re.mag
    b = z.im.mag
    _, a_square = _mul_directed(a, a)
    _, b_square = _mul_directed(b, b)
    squares = _add_up(a_square, b_square)
    root = np.sqrt(squares)
    root_square_lo, _ = _mul_directed(root, root)
    bound = np.where(root_square_lo >= squares, root, _up(root))
    return float(bound) if bound.ndim == 0 else bound


def iv_hull_all(parts: Iterable[Interval]) -> Interval:
    parts = list(parts)
    result = parts[0]
    for part in parts[1:]:
        result = result.hull(part)
    return result
