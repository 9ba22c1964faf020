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

"""Package-wide defaults, overridable from the ``[sbwave]`` section of the Covalent config."""

from typing import Any

from covalent._shared_files import logger
from covalent._shared_files.config import get_config

app_log = logger.app_log
log_stack_info = logger.log_stack_info

_SBWAVE_DEFAULTS = {
    # Newton
    "max_iters": 60,
    "residual_tol": 1e-10,
    "damping": 1.0,
    "min_damping": 2.0**-10,
    "dense_jacobian_limit": 6000,
    "guess": "one_peak",
    "amplitude": 3.0,
    "width": 3.0,
    "separation": 8.0,
    # continuation
    "min_step": 1e-3,
    "seed_step": 0.02,
    # rigorous stages
    "nu": [1.0 + 1e-7, 1.0 + 1e-7],
    "rho_bar": [0.09531, 0.09531],
    "aliasing_warning": 1e-14,
    "cell_enclosure": "mean_value",
    "column_chunk": 256,
    "threads": 3,
    # covalent
    "executor": "local",
    # output
    "out_dir": "sbwave-runs",
    "profile_points": [201, 101],
}


def get_setting(key: str, value: Any = None) -> Any:
    """Resolve a setting from the explicit value, the Covalent config or the defaults.

    Lookup order: ``value`` when given, then ``sbwave.<key>`` in the Covalent
    config, then ``_SBWAVE_DEFAULTS``.

    Args:
        key: Name of the setting
        value: Explicit value, returned unchanged when not ``None``

    Returns:
        The resolved setting
    """
    if value is not None:
        return value
    try:
        return get_config(f"sbwave.{key}")
    except (KeyError, TypeError):
        app_log.debug(f"Setting sbwave.{key} not in Covalent config, using default")
    return _SBWAVE_DEFAULTS[key]
