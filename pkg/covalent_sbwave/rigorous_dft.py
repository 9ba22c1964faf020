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

"""Rigorous Fourier coefficients of the nonlinearity.

The coefficients ``b_n`` of ``G(u)`` for a finitely supported cosine profile
are enclosed in two regimes. Inside the aliasing box ``I+_{N_alias}`` they are
the interval DFT of ``G`` sampled on the uniform mesh ``pi k / N_fft`` plus the
aliasing error ``C * eps_n``. Outside, ``|b_n| <= C / nu_bar^|n|`` where ``C``
bounds ``|G(u)|`` on the complex contour shifted by ``rho_bar``.

Grids on the FFT mesh have ``2 N_fft`` points per axis and hold ``Z^2``
coefficients at positions ``n mod 2 N_fft``.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from covalent._shared_files import logger
from scipy import fft

from .coeffs import CoeffGrid, IndexPair, NormParams, full_symmetric, index_grid, norm_ell1_nu
from .config import get_setting
from .exceptions import ConstraintViolation
from .interval import (
    PI,
    TWO_PI,
    ComplexInterval,
    Interval,
    expi,
    iv_exp,
    iv_sum,
    iv_trig,
    next_up,
    upper_sum,
)

app_log = logger.app_log
log_stack_info = logger.log_stack_info

Scalar = Union[Interval, float]


class NonlinearityVariant(str, Enum):
    """``G(u) = e^u - u - 1`` and its first two derivatives."""

    G = "G"
    GP = "Gp"
    GPP = "Gpp"

    def apply_real(self, x: Interval) -> Interval:
        exp_x = x.exp()
        if self is NonlinearityVariant.G:
            return exp_x - x - 1.0
        if self is NonlinearityVariant.GP:
            return exp_x - 1.0
        return exp_x

    def apply_complex(self, z: ComplexInterval) -> ComplexInterval:
        exp_z = z.exp()
        if self is NonlinearityVariant.G:
            return exp_z - z - 1.0
        if self is NonlinearityVariant.GP:
            return exp_z - 1.0
        return exp_z

    def apply_float(self, x: np.ndarray) -> np.ndarray:
        if self is NonlinearityVariant.G:
            return np.expm1(x) - x
        if self is NonlinearityVariant.GP:
            return np.expm1(x)
        return np.exp(x)


@dataclass(frozen=True)
class AnalyticityParams:
    """Contour shift ``rho_bar`` with ``nu_bar = exp(rho_bar)``."""

    rho_bar: Tuple[float, float]

    def __post_init__(self) -> None:
        if len(self.rho_bar) != 2 or min(self.rho_bar) <= 0:
            raise ConstraintViolation(
                "rho_bar>0", f"contour shift must be positive, got {self.rho_bar}"
            )
        object.__setattr__(self, "rho_bar", (float(self.rho_bar[0]), float(self.rho_bar[1])))

    @property
    def nu_bar(self) -> Tuple[Interval, Interval]:
        return iv_exp(Interval(self.rho_bar[0])), iv_exp(Interval(self.rho_bar[1]))

    def _exponent(self, i1, i2) -> Interval:
        abs1 = Interval(np.abs(np.asarray(i1, dtype=np.float64)))
        abs2 = Interval(np.abs(np.asarray(i2, dtype=np.float64)))
        return abs1 * self.rho_bar[0] + abs2 * self.rho_bar[1]

    def decay(self, i1, i2) -> Interval:
        """Enclosure of ``nu_bar^(-|i|)`` for index arrays."""
        return iv_exp(-self._exponent(i1, i2))

    def growth(self, i1, i2) -> Interval:
        """Enclosure of ``nu_bar^|i|``."""
        return iv_exp(self._exponent(i1, i2))

    def weight_ratio(self, w: NormParams) -> Tuple[Interval, Interval]:
        """``nu / nu_bar`` per axis, required to be below one."""
        log_nu = w.log_nu()
        ratio = tuple(iv_exp(log_nu[j] - self.rho_bar[j]) for j in range(2))
        if any(float(r.hi) >= 1.0 for r in ratio):
            raise ConstraintViolation(
                "nu<nu_bar",
                f"weights {w.nu} must lie below exp(rho_bar) for rho_bar={self.rho_bar}",
            )
        return ratio


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def mesh_shape(n_fft: IndexPair) -> Tuple[int, int]:
    return 2 * n_fft[0], 2 * n_fft[1]


def mesh_points(n_fft: IndexPair, q: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
    """Physical mesh ``x_{j,k} = pi k / (q_j N_fft_j)`` for ``k = 0..2 N_fft_j - 1``."""
    return tuple(np.pi * np.arange(2 * n_fft[j]) / (q[j] * n_fft[j]) for j in range(2))


# ---- interval FFT -------------------------------------------------------------


@lru_cache(maxsize=None)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    index = np.arange(n)
    reversed_index = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        reversed_index |= ((index >> b) & 1) << (bits - 1 - b)
    reversed_index.setflags(write=False)
    return reversed_index


@lru_cache(maxsize=None)
def _twiddles(n: int) -> Tuple[Interval, Interval]:
    """Enclosures of ``cos`` and ``sin`` of ``2 pi k / n`` for ``k < n/2``."""
    theta = TWO_PI * Interval(np.arange(n // 2, dtype=np.float64)) / float(n)
    cos, sin = iv_trig(theta, "cos"), iv_trig(theta, "sin")
    for part in (cos.lo, cos.hi, sin.lo, sin.hi):
        part.setflags(write=False)
    return cos, sin


def _fft_last_axis(z: ComplexInterval, inverse: bool) -> ComplexInterval:
    """Unnormalized radix-2 decimation-in-time transform along the last axis."""
    n = z.shape[-1]
    if n == 1:
        return z
    lead = z.shape[:-1]
    z = z[..., _bit_reversal(n)]
    cos, sin = _twiddles(n)
    size = 2
    while size <= n:
        half = size // 2
        stride = n // size
        w_sin = sin[0 : half * stride : stride]
        w = ComplexInterval(cos[0 : half * stride : stride], w_sin if inverse else -w_sin)
        blocks = z.reshape(*lead, n // size, size)
        even = blocks[..., :half]
        odd = blocks[..., half:] * w
        z = ComplexInterval.concatenate([even + odd, even - odd], axis=-1).reshape(*lead, n)
        size *= 2
    return z


def _thin_midrad(x: Interval) -> Tuple[np.ndarray, np.ndarray]:
    """``midrad`` that keeps point intervals exact."""
    mid, rad = x.midrad()
    thin = x.lo == x.hi
    return np.where(thin, x.lo, mid), np.where(thin, 0.0, rad)


def interval_fft_2d(g: ComplexInterval, direction: str = "forward") -> ComplexInterval:
    """Rigorous 2D DFT of an interval grid.

    ``forward`` computes ``(1/(M1 M2)) sum_k g_k exp(-2 pi i n.k / M)`` and
    ``inverse`` the unnormalized sum with ``exp(+2 pi i n.k / M)``.

    The grid is split into float midpoints and a complex radius. Only the
    midpoints go through the butterflies; since every twiddle has modulus one,
    the radii add up to a single spread that is the same for every output entry.

    Args:
        g: Complex interval grid of shape ``(M1, M2)``, both powers of two
        direction: ``forward`` or ``inverse``

    Returns:
        Complex interval grid of the same shape enclosing the transform
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"Unknown transform direction: {direction}")
    g = ComplexInterval.coerce(g)
    if len(g.shape) != 2 or not all(is_power_of_two(m) for m in g.shape):
        raise ValueError(f"Interval FFT needs power-of-two dimensions, got {g.shape}")
    inverse = direction == "inverse"
    mid_re, rad_re = _thin_midrad(g.re)
    mid_im, rad_im = _thin_midrad(g.im)
    radius = rad_re + rad_im
    spread = float(upper_sum(next_up(radius))) if np.any(radius) else 0.0

    out = _fft_last_axis(ComplexInterval(Interval(mid_re), Interval(mid_im)), inverse)
    out = _fft_last_axis(out.moveaxis(0, -1), inverse).moveaxis(-1, 0)
    if not inverse:
        scale = 1.0 / (g.shape[0] * g.shape[1])
        out = out * scale
        spread = float(next_up(spread * scale))
    if spread > 0.0:
        ball = Interval(-spread, spread)
        out = out + ComplexInterval(ball, ball)
    return out


def naive_interval_dft_2d(g: ComplexInterval, direction: str = "forward") -> ComplexInterval:
    """Direct O(M^4) interval DFT with exact integer phase reduction, used as an oracle."""
    g = ComplexInterval.coerce(g)
    m1, m2 = g.shape
    r1 = np.mod(np.outer(np.arange(m1), np.arange(m1)), m1)
    r2 = np.mod(np.outer(np.arange(m2), np.arange(m2)), m2)
    phase = np.mod(r1[:, None, :, None] * m2 + r2[None, :, None, :] * m1, m1 * m2)
    theta = TWO_PI * Interval(phase.astype(np.float64)) / float(m1 * m2)
    w = expi(theta if direction == "inverse" else -theta)
    terms = (w * g[None, None]).reshape(m1, m2, m1 * m2)
    out = ComplexInterval(iv_sum(terms.re, axis=-1), iv_sum(terms.im, axis=-1))
    if direction == "forward":
        out = out * (1.0 / (m1 * m2))
    return out


def _place_on_mesh(block: ComplexInterval, dims: IndexPair, n_fft: IndexPair) -> ComplexInterval:
    """Scatter ``Z^2`` coefficients over ``-dims..dims`` onto the ``2 N_fft`` grid."""
    if dims[0] >= n_fft[0] or dims[1] >= n_fft[1]:
        raise ConstraintViolation(
            "N_gal<N_fft", f"coefficient support {dims} must lie inside the FFT grid {n_fft}"
        )
    m1, m2 = mesh_shape(n_fft)
    grid = ComplexInterval.zeros((m1, m2))
    rows = np.mod(np.arange(-dims[0], dims[0] + 1), m1)
    cols = np.mod(np.arange(-dims[1], dims[1] + 1), m2)
    grid[np.ix_(rows, cols)] = block
    return grid


def mesh_samples(a_bar: CoeffGrid, n_fft: IndexPair) -> Interval:
    """Enclosures of ``u_bar`` on the uniform mesh, a real grid of shape ``2 N_fft``."""
    dims = a_bar.support_dims()
    block = full_symmetric(a_bar.resized(dims).as_interval())
    samples = interval_fft_2d(_place_on_mesh(ComplexInterval(block), dims, n_fft), "inverse")
    return samples.re


CELL_ENCLOSURES = ("mean_value", "rectangle")

# phase swept by the highest mode across one mesh cell, in radians
COARSE_CELL_PHASE = 0.5


def _index_axes(dims: IndexPair) -> Tuple[np.ndarray, np.ndarray]:
    s1 = np.arange(-dims[0], dims[0] + 1, dtype=np.float64)[:, None]
    s2 = np.arange(-dims[1], dims[1] + 1, dtype=np.float64)[None, :]
    return s1, s2


def _warn_coarse_cells(dims: IndexPair, n_fft: IndexPair) -> None:
    span = max(dims[j] * np.pi / n_fft[j] for j in range(2))
    if span > COARSE_CELL_PHASE:
        app_log.warning(
            f"Mesh cells of N_fft={n_fft} span {span:.3f} rad of the highest mode {dims}; "
            f"C_rho_bar will be loose, consider a larger N_fft"
        )


def shifted_samples(
    a_bar: CoeffGrid,
    ap: AnalyticityParams,
    n_fft: IndexPair,
    cell: Optional[str] = None,
) -> ComplexInterval:
    """Enclosures of ``u_bar`` on the contour shifted by ``rho_bar``, one per mesh cell.

    Entry ``k`` covers ``u_bar(x_k + delta - i rho_bar)`` for every ``delta`` in
    the cell ``[0, pi / N_fft_1] x [0, pi / N_fft_2]``.

    ``rectangle`` transforms the coefficients ``a_|n| e^{n.rho_bar} e^{i n.Delta}``
    with ``Delta`` the whole cell. ``mean_value`` evaluates ``u_bar`` and its
    gradient at the cell centre and adds the offset to the cell corners times
    the gradient, widened by a bound on its variation across the cell.

    Args:
        a_bar: Profile coefficients
        ap: Contour shift parameters
        n_fft: FFT half sizes, above the profile support
        cell: ``mean_value`` or ``rectangle``, defaults to ``sbwave.cell_enclosure``

    Returns:
        Complex interval grid of shape ``2 N_fft``
    """
    cell = get_setting("cell_enclosure", cell)
    if cell not in CELL_ENCLOSURES:
        raise ConstraintViolation("cell", f"unknown cell enclosure {cell!r}")
    dims = a_bar.support_dims()
    if dims[0] >= n_fft[0] or dims[1] >= n_fft[1]:
        raise ConstraintViolation(
            "N_fft>N_gal", f"N_fft={n_fft} must exceed the profile support {dims}"
        )
    _warn_coarse_cells(dims, n_fft)
    block = full_symmetric(a_bar.resized(dims).as_interval())
    s1, s2 = _index_axes(dims)
    lifted = block * iv_exp(Interval(s1) * ap.rho_bar[0] + Interval(s2) * ap.rho_bar[1])
    steps = [PI / float(n_fft[j]) for j in range(2)]

    if cell == "rectangle":
        cells = [Interval(0.0, float(steps[j].hi)) for j in range(2)]
        phase = expi(Interval(s1) * cells[0] + Interval(s2) * cells[1])
        return interval_fft_2d(_place_on_mesh(phase * lifted, dims, n_fft), "inverse")

    centres = [float(0.5 * steps[j].mid) for j in range(2)]
    offsets = [Interval(0.0, float(steps[j].hi)) - centres[j] for j in range(2)]
    at_centre = expi(Interval(s1) * centres[0] + Interval(s2) * centres[1]) * lifted
    samples = interval_fft_2d(_place_on_mesh(at_centre, dims, n_fft), "inverse")

    # |n.(xi - centre)| over the cell bounds |exp(i n.(xi - centre)) - 1|
    sweep = Interval(np.abs(s1)) * float(offsets[0].mag) + Interval(np.abs(s2)) * float(
        offsets[1].mag
    )
    magnitudes = Interval(lifted.mag)
    for s, offset in ((s1, offsets[0]), (s2, offsets[1])):
        derivative = ComplexInterval(-at_centre.im * Interval(s), at_centre.re * Interval(s))
        gradient = interval_fft_2d(_place_on_mesh(derivative, dims, n_fft), "inverse")
        drift = float(iv_sum(Interval(np.abs(s)) * sweep * magnitudes).hi)
        ball = Interval(-drift, drift)
        samples = samples + (gradient + ComplexInterval(ball, ball)) * offset
    return samples


def compute_bfft(
    a_bar: CoeffGrid,
    variant: NonlinearityVariant,
    n_fft: IndexPair,
    samples: Optional[Interval] = None,
) -> Interval:
    """Interval enclosure of ``b_fft_n`` for ``n`` in ``I+_{N_fft}``.

    Args:
        a_bar: Profile coefficients, support strictly inside ``I+_{N_fft}``
        variant: Which of ``G``, ``G'``, ``G''`` to transform
        n_fft: FFT half sizes, powers of two
        samples: Precomputed ``mesh_samples`` shared between variants

    Returns:
        Real interval grid of shape ``(N_fft1+1, N_fft2+1)``
    """
    if samples is None:
        samples = mesh_samples(a_bar, n_fft)
    values = variant.apply_real(samples)
    transform = interval_fft_2d(ComplexInterval(values), "forward")
    return transform.re[: n_fft[0] + 1, : n_fft[1] + 1]


def compute_C(
    a_bar: CoeffGrid,
    ap: AnalyticityParams,
    variant: NonlinearityVariant,
    n_fft: IndexPair,
    shifted: Optional[ComplexInterval] = None,
) -> float:
    """Upward-rounded ``C_rho_bar``: the mesh mean of ``|G|`` on the shifted contour.

    For cosine profiles the four sign choices of the shift give the same mean,
    so this also bounds the symmetric constant used by the enclosures.
    """
    if shifted is None:
        shifted = shifted_samples(a_bar, ap, n_fft)
    magnitudes = variant.apply_complex(shifted).abs_upper()
    count = magnitudes.size
    bound = float(next_up(upper_sum(magnitudes) / count))
    app_log.debug(f"C_rho_bar[{variant.value}] <= {bound!r} on a {shifted.shape} mesh")
    return bound


def f_geo(xi: Sequence[Scalar], dims: IndexPair) -> Interval:
    """Closed form of ``sum_{n not in I+_N} gamma_n xi^n`` for ``0 <= xi < 1``."""
    x1, x2 = (Interval.coerce(v) for v in xi)
    for x in (x1, x2):
        if float(x.hi) >= 1.0 or float(x.lo) < 0.0:
            raise ConstraintViolation("xi<1", f"geometric ratio must lie in [0,1), got {x!r}")
    p1 = x1 ** (dims[0] + 1)
    p2 = x2 ** (dims[1] + 1)
    numerator = 2.0 * p1 * (1.0 + x2) + 2.0 * p2 * (1.0 + x1) - 4.0 * p1 * p2
    return numerator / ((1.0 - x1) * (1.0 - x2))


def aliasing_factor(ap: AnalyticityParams, n_fft: IndexPair) -> Interval:
    """``f_geo(nu_bar^(-2 N_fft), 0)``, the index independent part of ``eps_n``."""
    xi = [iv_exp(Interval(-2.0 * n_fft[j] * ap.rho_bar[j])) for j in range(2)]
    return f_geo(xi, (0, 0))


@dataclass
class EnclosedCoeffs:
    """Two-regime enclosure of the coefficients ``b_n`` of one nonlinearity variant.

    For ``n`` in ``I+_{N_alias}``, ``b_n`` lies in ``fft_part_n + C_hat [-eps_n, eps_n]``;
    for every other ``n``, ``|b_n| <= C_hat / nu_bar^|n|``.
    """

    variant: NonlinearityVariant
    fft_part: Interval
    C_hat: float
    ap: AnalyticityParams
    n_fft: IndexPair
    eps: np.ndarray
    _tables: Dict[IndexPair, Interval] = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_alias(self) -> IndexPair:
        return self.fft_part.shape[0] - 1, self.fft_part.shape[1] - 1

    def aliasing_radius(self) -> np.ndarray:
        return next_up(self.C_hat * self.eps)

    def enclosure(self) -> Interval:
        """``b_n`` enclosures over ``I+_{N_alias}``."""
        radius = self.aliasing_radius()
        return self.fft_part + Interval(-radius, radius)

    def tail_bound(self, i1, i2) -> np.ndarray:
        """Upper bound of ``C_hat / nu_bar^|i|``."""
        return (Interval(self.C_hat) * self.ap.decay(i1, i2)).hi

    def table(self, dims: IndexPair) -> Interval:
        """Enclosures of ``b_n`` over ``I+_dims`` mixing both regimes."""
        if dims in self._tables:
            return self._tables[dims]
        n1, n2 = index_grid(dims)
        bound = self.tail_bound(n1, n2)
        out = Interval(-bound, bound)
        rows = min(dims[0], self.n_alias[0]) + 1
        cols = min(dims[1], self.n_alias[1]) + 1
        out[:rows, :cols] = self.enclosure()[:rows, :cols]
        self._tables[dims] = out
        return out

    def lookup(self, i1, i2) -> Interval:
        """Vectorized enclosure of ``b_{|i|}`` for arbitrary index arrays."""
        i1 = np.abs(np.asarray(i1))
        i2 = np.abs(np.asarray(i2))
        dims = (int(i1.max(initial=0)), int(i2.max(initial=0)))
        for cached_dims, cached in self._tables.items():
            if cached_dims[0] >= dims[0] and cached_dims[1] >= dims[1]:
                return cached[i1, i2]
        dims = (max(dims[0], self.n_alias[0]), max(dims[1], self.n_alias[1]))
        return self.table(dims)[i1, i2]

    def magnitudes(self, dims: IndexPair) -> np.ndarray:
        """Upper bounds of ``|b_n|`` over ``I+_dims``."""
        return self.table(dims).mag

    def midpoints(self, dims: Optional[IndexPair] = None) -> np.ndarray:
        dims = dims or self.n_alias
        out = np.zeros((dims[0] + 1, dims[1] + 1))
        rows = min(dims[0], self.n_alias[0]) + 1
        cols = min(dims[1], self.n_alias[1]) + 1
        out[:rows, :cols] = self.fft_part.mid[:rows, :cols]
        return out

    def weighted_norm(self, w: NormParams) -> Interval:
        """Bound of ``||b||_nu``: the enclosed box plus the geometric tail outside it."""
        inside = iv_sum(self.enclosure().abs() * w.weights(self.n_alias))
        tail = Interval(self.C_hat) * f_geo(self.ap.weight_ratio(w), self.n_alias)
        return inside + tail


def enclose_b(
    a_bar: CoeffGrid,
    ap: AnalyticityParams,
    variant: NonlinearityVariant,
    n_alias: IndexPair,
    n_fft: IndexPair,
    samples: Optional[Interval] = None,
    shifted: Optional[ComplexInterval] = None,
) -> EnclosedCoeffs:
    """Enclose ``b_n`` of one variant for all ``n``.

    Args:
        a_bar: Profile coefficients
        ap: Contour shift parameters
        variant: Nonlinearity variant
        n_alias: Box where FFT values plus aliasing errors are used
        n_fft: FFT half sizes
        samples: Optional shared ``mesh_samples``
        shifted: Optional shared ``shifted_samples``

    Returns:
        EnclosedCoeffs for the variant
    """
    if n_alias[0] >= n_fft[0] or n_alias[1] >= n_fft[1]:
        raise ConstraintViolation(
            "N_alias<N_fft", f"N_alias={n_alias} must be below N_fft={n_fft}"
        )
    C_hat = compute_C(a_bar, ap, variant, n_fft, shifted)
    bfft = compute_bfft(a_bar, variant, n_fft, samples)
    fft_part = bfft[: n_alias[0] + 1, : n_alias[1] + 1]
    n1, n2 = index_grid(n_alias)
    eps = (ap.growth(n1, n2) * aliasing_factor(ap, n_fft)).hi
    enclosed = EnclosedCoeffs(variant, fft_part, C_hat, ap, tuple(n_fft), eps)

    ratio = aliasing_ratio(enclosed)
    norm_a = float(norm_ell1_nu(a_bar, NormParams()).hi)
    threshold = get_setting("aliasing_warning")
    if ratio > threshold * norm_a:
        app_log.warning(
            f"Aliasing error C*eps={ratio:.3e} at N_alias={n_alias} for {variant.value} exceeds "
            f"{threshold:g}*||a_bar||; consider a larger N_fft"
        )
    return enclosed


def aliasing_ratio(enclosed: EnclosedCoeffs) -> float:
    """Size of the aliasing error ``C * eps_n`` at ``n = N_alias``."""
    return float(enclosed.aliasing_radius()[-1, -1])


def estimate_decay_rate(a_bar: CoeffGrid, floor: float = 1e-300) -> Tuple[float, float]:
    """Fit the geometric decay rate ``nu_a`` of the coefficients along each axis.

    The envelope ``max_{n_other} |a_n|`` is fitted in log scale over the upper
    three quarters of the support. Returns ``inf`` for an axis without enough data.
    """
    values = np.abs(a_bar.midpoints())
    rates = []
    for axis in range(2):
        envelope = values.max(axis=1 - axis)
        k = np.arange(envelope.size)
        keep = (envelope > floor) & (k >= envelope.size // 4)
        if keep.sum() < 2:
            rates.append(float("inf"))
            continue
        slope = np.polyfit(k[keep], np.log(envelope[keep]), 1)[0]
        rates.append(float(np.exp(-slope)) if slope < 0 else 1.0)
    return rates[0], rates[1]


def check_decay_heuristic(a_bar: CoeffGrid, w: NormParams, ap: AnalyticityParams) -> bool:
    """Warn unless ``nu < nu_bar < nu_a`` componentwise. Never changes parameters."""
    nu_a = estimate_decay_rate(a_bar)
    nu_bar = [float(v.mid) for v in ap.nu_bar]
    ok = all(w.nu[j] < nu_bar[j] < nu_a[j] for j in range(2))
    if not ok:
        app_log.warning(
            f"Decay heuristic: expected nu={w.nu} < nu_bar={tuple(nu_bar)} < nu_a={nu_a}"
        )
    return ok


# ---- float fast path ------------------------------------------------------------


def dct_samples(values: np.ndarray, n_fft: IndexPair) -> np.ndarray:
    """``u`` on the mesh ``k = 0..N_fft`` of one quarter period via a type-1 DCT."""
    padded = np.zeros((n_fft[0] + 1, n_fft[1] + 1))
    rows = min(values.shape[0], n_fft[0])
    cols = min(values.shape[1], n_fft[1])
    padded[:rows, :cols] = values[:rows, :cols]
    return fft.dctn(padded, type=1)


def dct_coefficients(samples: np.ndarray, n_fft: IndexPair) -> np.ndarray:
    """Mesh transform of an even sampled function, ``b_fft_n`` for ``n in I+_{N_fft}``."""
    return fft.dctn(samples, type=1) / (4.0 * n_fft[0] * n_fft[1])
