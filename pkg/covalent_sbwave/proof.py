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

"""Proof orchestration and certificates.

``prove`` encloses the coefficients of the three nonlinearity variants
concurrently, builds ``A``, computes the Y, Z and W bounds, selects ``r_star``
and records everything in a :class:`Certificate`. A certificate can be checked
offline with :func:`verify_certificate` from its stored numbers alone.
"""

import asyncio
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from covalent._shared_files import logger

from .bounds import RadiiResult, bound_W, bound_Y, bound_Z, find_rstar
from .coeffs import FLAT_INDEX_LAYOUT, CoeffGrid, NormParams
from .config import get_setting
from .dumps import array_digest
from .exceptions import (
    CertificateError,
    ConstraintViolation,
    IntervalError,
    RadiiPolynomialError,
)
from .interval import Interval, iv_exp
from .problem import OperatorA, ProblemParams, TruncationSet, assemble_DF
from .rigorous_dft import (
    AnalyticityParams,
    EnclosedCoeffs,
    NonlinearityVariant,
    check_decay_heuristic,
    enclose_b,
    mesh_samples,
    shifted_samples,
)

app_log = logger.app_log
log_stack_info = logger.log_stack_info

PROVEN = "proven"

_FLOAT_FIELDS = ("c", "Y", "Z", "W_hat", "W", "r_star", "r_min", "r_max", "sup_norm_bound")
_PAIR_FIELDS = ("q", "nu", "rho_bar")
_TABLE_FIELDS = ("y_pieces", "z_components", "w_parts", "C_hat", "timing")


def _encode(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    return value


def _decode_float(value: Optional[str]) -> Optional[float]:
    return None if value is None else float(value)


@dataclass
class Certificate:
    """Inputs, bounds and outcome of one proof attempt.

    Bounds are upward-rounded floats. ``status`` is ``proven`` or
    ``failed(<reason>)`` where the reason names the violated condition.
    """

    c: float
    q: Tuple[float, float]
    trunc: Dict[str, List[int]]
    nu: Tuple[float, float]
    rho_bar: Tuple[float, float]
    a_bar_dims: Tuple[int, int]
    a_bar_digest: str
    status: str = "pending"
    Y: Optional[float] = None
    Z: Optional[float] = None
    W_hat: Optional[float] = None
    W: Optional[float] = None
    r_star: Optional[float] = None
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    sup_norm_bound: Optional[float] = None
    y_pieces: Dict[str, float] = field(default_factory=dict)
    z_components: Dict[str, float] = field(default_factory=dict)
    w_parts: Dict[str, float] = field(default_factory=dict)
    C_hat: Dict[str, float] = field(default_factory=dict)
    timing: Dict[str, float] = field(default_factory=dict)
    layout: str = FLAT_INDEX_LAYOUT
    content_digest: str = ""

    @property
    def proven(self) -> bool:
        return self.status == PROVEN

    def fail(self, reason: str) -> None:
        self.status = f"failed({reason})"

    def _payload(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload.pop("content_digest")
        return _encode(payload)

    def compute_digest(self) -> str:
        canonical = json.dumps(self._payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def seal(self) -> "Certificate":
        self.content_digest = self.compute_digest()
        return self

    def to_dict(self) -> Dict[str, Any]:
        out = self._payload()
        out["content_digest"] = self.content_digest
        return out

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Certificate":
        try:
            values = dict(data)
            for name in _FLOAT_FIELDS:
                values[name] = _decode_float(values.get(name))
            for name in _PAIR_FIELDS:
                values[name] = tuple(float(v) for v in values[name])
            for name in _TABLE_FIELDS:
                values[name] = {k: float(v) for k, v in values.get(name, {}).items()}
            values["a_bar_dims"] = tuple(int(v) for v in values["a_bar_dims"])
            values["trunc"] = {k: [int(x) for x in v] for k, v in values["trunc"].items()}
            return cls(**values)
        except (KeyError, TypeError, ValueError) as e:
            raise CertificateError(f"Malformed certificate: {e}") from e


def save_certificate(cert: Certificate, path: str) -> str:
    try:
        with open(path, "w") as f:
            f.write(cert.to_json())
    except OSError as e:
        app_log.exception(e)
        raise
    app_log.debug(f"Certificate ({cert.status}) written to {path}")
    return path


def load_certificate(path: str) -> Certificate:
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise CertificateError(f"{path} is not valid JSON: {e}") from e
    except OSError as e:
        app_log.exception(e)
        raise
    return Certificate.from_dict(data)


def verify_certificate(cert: Certificate, a_bar: Optional[CoeffGrid] = None) -> RadiiResult:
    """Re-check the radii polynomial inequalities from the stored numbers.

    The inequalities are checked first so a forged bound is reported by the
    condition it breaks; the content digest is checked afterwards.

    Args:
        cert: Certificate to check
        a_bar: Optional coefficients to match against the stored digest

    Returns:
        The verified radius window

    Raises:
        RadiiPolynomialError: naming the inequality that does not hold
        CertificateError: unproven status, missing fields or digest mismatch
    """
    if not cert.proven:
        raise CertificateError(f"Certificate status is {cert.status}")
    required = ("Y", "Z", "W_hat", "W", "r_star", "r_min", "r_max", "sup_norm_bound")
    missing = [name for name in required if getattr(cert, name) is None]
    if missing:
        raise CertificateError(f"Certificate lacks {', '.join(missing)}")

    Y = Interval(cert.Y)
    Z = Interval(cert.Z)
    if not cert.Z < 1.0:
        raise RadiiPolynomialError("Z<1", f"Z={cert.Z!r}")
    W_recomputed = Interval(cert.W_hat) * iv_exp(Interval(cert.r_star))
    if cert.W < float(W_recomputed.hi):
        raise CertificateError(f"W={cert.W!r} is below W_hat e^r_star={W_recomputed!r}")
    W = Interval(cert.W)
    gap = 1.0 - Z
    discriminant = gap.sqr() - 2.0 * Y * W
    if not float(discriminant.lo) > 0:
        raise RadiiPolynomialError("2YW<(1-Z)^2", f"discriminant={discriminant!r}")
    r_lower = 2.0 * Y / (gap + discriminant.sqrt())
    if cert.r_min < float(r_lower.hi):
        raise RadiiPolynomialError(
            "r_min<r_max", f"r_min={cert.r_min!r} lies below the smaller root {r_lower!r}"
        )
    limit = cert.r_star if cert.W == 0 else min(float((gap / W).lo), cert.r_star)
    if not (cert.r_min < cert.r_max < limit):
        raise RadiiPolynomialError(
            "r_min<r_max", f"r_min={cert.r_min!r} r_max={cert.r_max!r} limit={limit!r}"
        )
    if cert.sup_norm_bound < cert.r_min:
        raise CertificateError("sup_norm_bound must not be smaller than r_min")

    if cert.content_digest != cert.compute_digest():
        raise CertificateError("Content digest does not match the certificate fields")
    if a_bar is not None and array_digest(a_bar.midpoints()) != cert.a_bar_digest:
        raise CertificateError("Coefficient digest does not match a_bar")
    return RadiiResult(cert.r_star, cert.r_min, cert.r_max, cert.W)


def check_cert(path: str, a_bar: Optional[CoeffGrid] = None) -> Certificate:
    """Load and verify a certificate file without recomputing any bound."""
    cert = load_certificate(path)
    verify_certificate(cert, a_bar)
    app_log.debug(f"Certificate {path} verified, r_min={cert.r_min!r}")
    return cert


# ---- enclosures ---------------------------------------------------------------


async def _enclose_variants(
    a_bar: CoeffGrid,
    ap: AnalyticityParams,
    trunc: TruncationSet,
    samples: Interval,
    shifted,
    threads: int,
) -> Dict[NonlinearityVariant, EnclosedCoeffs]:
    """Enclose G, G' and G'' on a bounded thread pool; results are joined in fixed order."""
    loop = asyncio.get_running_loop()
    variants = list(NonlinearityVariant)
    enclose = partial(enclose_b, a_bar, ap)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [
            loop.run_in_executor(
                pool, enclose, variant, trunc.n_alias, trunc.n_fft, samples, shifted
            )
            for variant in variants
        ]
        results = await asyncio.gather(*futures)
    return dict(zip(variants, results))


def enclose_variants(
    a_bar: CoeffGrid,
    ap: AnalyticityParams,
    trunc: TruncationSet,
    threads: Optional[int] = None,
) -> Dict[NonlinearityVariant, EnclosedCoeffs]:
    """Enclosures of all three variants sharing the mesh and contour samples."""
    threads = int(get_setting("threads", threads))
    samples = mesh_samples(a_bar, trunc.n_fft)
    shifted = shifted_samples(a_bar, ap, trunc.n_fft)
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return asyncio.run(_enclose_variants(a_bar, ap, trunc, samples, shifted, threads))
    app_log.debug("Event loop already running, enclosing variants sequentially")
    return {
        variant: enclose_b(a_bar, ap, variant, trunc.n_alias, trunc.n_fft, samples, shifted)
        for variant in NonlinearityVariant
    }


# ---- pipeline -----------------------------------------------------------------


@dataclass
class ProofOutcome:
    certificate: Certificate
    enclosed: Dict[NonlinearityVariant, EnclosedCoeffs] = field(default_factory=dict)
    operator: Optional[OperatorA] = None


def _failure_reason(error: Exception) -> str:
    if isinstance(error, ConstraintViolation):
        return error.constraint
    if isinstance(error, RadiiPolynomialError):
        return error.condition
    return f"{type(error).__name__}: {error}"


def run_proof(
    params: ProblemParams,
    trunc: TruncationSet,
    w: NormParams,
    ap: AnalyticityParams,
    a_bar: CoeffGrid,
    threads: Optional[int] = None,
    r_star: Optional[float] = None,
) -> ProofOutcome:
    """Run every proof stage and keep the intermediate enclosures and ``A``.

    Stage failures end the run with ``status = failed(<reason>)``; they are
    logged, never raised.
    """
    values = a_bar.midpoints()
    cert = Certificate(
        c=params.c,
        q=params.q,
        trunc=trunc.to_dict(),
        nu=w.nu,
        rho_bar=ap.rho_bar,
        a_bar_dims=a_bar.dims,
        a_bar_digest=array_digest(values),
    )
    outcome = ProofOutcome(cert)
    start = time.perf_counter()
    stage = "validate"

    def mark(name: str, since: float) -> float:
        now = time.perf_counter()
        cert.timing[name] = now - since
        return now

    try:
        trunc.validate(params)
        support = a_bar.support_dims()
        if support[0] > trunc.n_gal[0] or support[1] > trunc.n_gal[1]:
            raise ConstraintViolation(
                "supp(a_bar)<=N_gal", f"a_bar has support {support} outside N_gal={trunc.n_gal}"
            )
        a_bar = CoeffGrid(values).resized(trunc.n_gal)
        ap.weight_ratio(w)
        tick = mark(stage, start)

        stage = "enclose"
        enclosed = enclose_variants(a_bar, ap, trunc, threads)
        outcome.enclosed = enclosed
        cert.C_hat = {variant.value: enc.C_hat for variant, enc in enclosed.items()}
        check_decay_heuristic(a_bar, w, ap)
        tick = mark(stage, tick)

        stage = "operator"
        jacobian = assemble_DF(a_bar, enclosed[NonlinearityVariant.GP], trunc.n_jac, params)
        A = OperatorA.from_jacobian(jacobian, trunc.n_jac, params)
        outcome.operator = A
        app_log.debug(f"A block holds {A.memory_bytes} bytes")
        tick = mark(stage, tick)

        stage = "Y"
        y = bound_Y(a_bar, A, enclosed[NonlinearityVariant.G], params, trunc, w)
        cert.Y = y.Y
        cert.y_pieces = {"block": y.block, "mid_range": y.mid_range, "tail": y.tail}
        tick = mark(stage, tick)

        stage = "Z"
        z = bound_Z(a_bar, A, enclosed[NonlinearityVariant.GP], params, trunc, w, threads=threads)
        cert.Z = z.Z
        cert.z_components = {
            "Z_col": z.Z_col,
            "Z_est": z.Z_est,
            "Z_est_block": z.Z_est_block,
            "Z_est_tail_rows": z.Z_est_tail_rows,
            "Z_est_far": z.Z_est_far,
        }
        tick = mark(stage, tick)

        stage = "W"
        wb = bound_W(a_bar, A, enclosed[NonlinearityVariant.GPP], params, trunc, w)
        cert.W_hat = wb.W_hat
        cert.w_parts = {"norm_A": wb.norm_A, "norm_bpp": wb.norm_bpp}
        tick = mark(stage, tick)

        stage = "radii"
        radii = find_rstar(cert.Y, cert.Z, cert.W_hat, r_star)
        cert.r_star = radii.r_star
        cert.r_min = radii.r_min
        cert.r_max = radii.r_max
        cert.W = radii.W
        # |u_hat - u_bar|_inf <= |a_hat - a_bar|_nu since nu >= 1
        cert.sup_norm_bound = radii.r_min
        mark(stage, tick)
        cert.status = PROVEN
    except (ConstraintViolation, RadiiPolynomialError, IntervalError, np.linalg.LinAlgError) as e:
        cert.fail(_failure_reason(e))
        app_log.warning(f"Proof failed in stage {stage}: {e}")
    cert.timing["total"] = time.perf_counter() - start
    cert.seal()
    app_log.debug(
        f"Proof for c={params.c} finished with status {cert.status} "
        f"(Y={cert.Y!r}, Z={cert.Z!r}, W={cert.W!r}, r_min={cert.r_min!r})"
    )
    return outcome


def prove(
    params: ProblemParams,
    trunc: TruncationSet,
    w: NormParams,
    ap: AnalyticityParams,
    a_bar: CoeffGrid,
    threads: Optional[int] = None,
    r_star: Optional[float] = None,
) -> Certificate:
    """Attempt to prove a true zero of ``F`` near ``a_bar``.

    Args:
        params: Wave speed and frequencies
        trunc: Truncation boxes
        w: Norm weights ``nu``
        ap: Contour shift ``rho_bar``
        a_bar: Approximate zero, supported in ``I+_{N_gal}``
        threads: Worker count for the enclosures and the column bounds
        r_star: Fixed radius for ``W``; minimized numerically when omitted

    Returns:
        The sealed Certificate, ``proven`` or ``failed(<reason>)``
    """
    return run_proof(params, trunc, w, ap, a_bar, threads, r_star).certificate
