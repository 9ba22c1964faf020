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

"""Run configurations read from flat TOML files.

Keys carry the parameter names used throughout the package::

    preset = "one-peak-c1.3-desk"     # optional base, explicit keys override it
    mode = "prove"
    c = 1.3
    q = [0.05, 0.1]
    n_gal = [60, 20]
    ...
    nu = [1.0000001, 1.0000001]
    rho_bar = [0.09531, 0.09531]
    guess = "one_peak"

Everything is validated when the file is parsed, so a bad box or an unknown
key fails before any computation starts.
"""

from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

import toml
from covalent._shared_files import logger

from .coeffs import NormParams
from .config import get_setting
from .exceptions import ConstraintViolation
from .presets import get_preset
from .problem import ProblemParams, TruncationSet
from .rigorous_dft import AnalyticityParams
from .solver import SolveConfig

app_log = logger.app_log
log_stack_info = logger.log_stack_info

MODES = ("solve", "prove", "continue", "parity")

_TRUNCATION_KEYS = tuple(TruncationSet.__dataclass_fields__)
_SOLVER_KEYS = tuple(f.name for f in fields(SolveConfig))
_RUN_KEYS = (
    "preset",
    "mode",
    "c",
    "q",
    "nu",
    "rho_bar",
    "out_dir",
    "threads",
    "r_star",
    "c_end",
    "step",
    "orders",
    "profile_points",
)
KNOWN_KEYS = frozenset(_RUN_KEYS + _TRUNCATION_KEYS + _SOLVER_KEYS)


@dataclass
class RunConfig:
    """A validated run: problem, boxes, weights and solver settings."""

    params: ProblemParams
    trunc: TruncationSet
    norm: NormParams
    analyticity: AnalyticityParams
    solver: SolveConfig
    mode: str = "prove"
    out_dir: Optional[str] = None
    threads: Optional[int] = None
    r_star: Optional[float] = None
    c_end: Optional[float] = None
    step: float = 0.01
    orders: List[int] = field(default_factory=lambda: [14, 15])
    profile_points: Optional[Tuple[int, int]] = None
    preset: Optional[str] = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConstraintViolation("mode", f"unknown mode {self.mode!r}, expected {MODES}")
        self.trunc.validate(self.params)
        self.analyticity.weight_ratio(self.norm)
        self.out_dir = get_setting("out_dir", self.out_dir)
        self.threads = int(get_setting("threads", self.threads))
        self.profile_points = tuple(get_setting("profile_points", self.profile_points))
        if self.mode in ("continue", "parity") and self.c_end is None:
            raise ConstraintViolation("c_end", f"mode={self.mode} needs c_end")
        if not self.step > 0:
            raise ConstraintViolation("step>0", f"continuation step must be positive: {self.step}")
        if self.mode == "parity" and len(self.orders) < 2:
            raise ConstraintViolation("orders", "the parity experiment compares at least two M")

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "RunConfig":
        """Build from flat keys, after merging the named ``preset`` underneath."""
        unknown = sorted(set(values) - KNOWN_KEYS)
        if unknown:
            raise ConstraintViolation("unknown key", f"unknown run configuration keys {unknown}")
        merged: Dict[str, Any] = {}
        if values.get("preset"):
            merged.update(get_preset(values["preset"]))
        merged.update(values)
        for key in ("c", "q") + _TRUNCATION_KEYS:
            if key not in merged:
                raise ConstraintViolation(key, f"run configuration is missing {key!r}")

        params = ProblemParams(merged["c"], tuple(merged["q"]))
        trunc = TruncationSet.from_dict(merged)
        norm = NormParams(tuple(get_setting("nu", merged.get("nu"))))
        analyticity = AnalyticityParams(tuple(get_setting("rho_bar", merged.get("rho_bar"))))
        solver = SolveConfig(**{k: merged[k] for k in _SOLVER_KEYS if k in merged})
        extra = {
            k: merged[k]
            for k in ("mode", "out_dir", "threads", "r_star", "c_end", "step", "orders")
            if k in merged
        }
        if "profile_points" in merged:
            extra["profile_points"] = tuple(merged["profile_points"])
        return cls(
            params=params,
            trunc=trunc,
            norm=norm,
            analyticity=analyticity,
            solver=solver,
            preset=merged.get("preset"),
            **extra,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Flat keys, the inverse of ``from_dict`` up to resolved defaults."""
        out: Dict[str, Any] = {
            "mode": self.mode,
            "c": self.params.c,
            "q": list(self.params.q),
            "nu": list(self.norm.nu),
            "rho_bar": list(self.analyticity.rho_bar),
            "out_dir": self.out_dir,
            "threads": self.threads,
            "step": self.step,
            "orders": list(self.orders),
            "profile_points": list(self.profile_points),
        }
        out.update(self.trunc.to_dict())
        for key in _SOLVER_KEYS:
            value = getattr(self.solver, key)
            if value is not None:
                out[key] = value
        for key in ("r_star", "c_end", "preset"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


def load_run_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Parse and validate a TOML run configuration.

    Args:
        path: TOML file with flat keys
        overrides: Keys that replace the file's values, e.g. from the command line

    Returns:
        The validated RunConfig
    """
    try:
        with open(path) as f:
            values = toml.load(f)
    except OSError as e:
        app_log.exception(e)
        raise
    except toml.TomlDecodeError as e:
        raise ConstraintViolation("toml", f"{path}: {e}") from e
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    app_log.debug(f"Loaded run configuration {path}: {sorted(values)}")
    return RunConfig.from_dict(values)


def dump_run_config(config: RunConfig) -> str:
    return toml.dumps(config.to_dict())
