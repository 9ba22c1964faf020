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

"""Named run configurations.

``one-peak-c1.1`` is the configuration of the one-peak existence proof at
``c = 1.1``. The other names give the profile and the wave speed: one peak,
two peaks, or a combination of both. Only their Galerkin boxes are published.
``_derived`` fills in the rest from ``N_gal`` and ``N_jac`` for the default
shift ``rho_bar = 0.09531``, where ``nu / nu_bar`` is close to ``1 / 1.1`` and a
geometric tail drops by ``1e-4`` over about 90 indices:

* ``N_jac`` is the smallest box with ``lambda_n >= 6`` outside it and above ``c/q1``.
* ``N_alias`` is ``spread`` times ``N_gal`` and at least 120, so the ``nu_bar``
  tail of ``b''`` outside it is negligible.
* ``N_fft`` is the power of two at or above twice ``N_alias``.
* ``N_col`` is ``N_jac`` plus 90 in each direction, which makes the uniform
  estimate for the columns outside it small.
* ``N_row`` is ``N_col1 + N_col2`` in both directions, since the row tail grows
  like ``nu_bar^|k|`` over the explicit columns.
* ``N_tail`` is ``N_jac`` plus 10.

The ``-desk`` variants use ``spread = 2`` and smaller Galerkin boxes and finish
on a single machine. Speeds close to ``sqrt(2)`` start from the one-peak wave at
``seed_c = 1.3`` and follow its branch.
"""

import copy
from typing import Dict, List, Sequence

from .exceptions import ConstraintViolation

_ONE_PEAK_Q = [0.0628, 0.0785]
_WIDE_Q = [0.05, 0.1]

_ALIAS_FLOOR = 120
_COLUMN_MARGIN = 90
_TAIL_MARGIN = 10


def _boxes(gal, jac, alias, fft, col, row, tail) -> Dict[str, List[int]]:
    return {
        "n_gal": list(gal),
        "n_jac": list(jac),
        "n_alias": list(alias),
        "n_fft": list(fft),
        "n_col": list(col),
        "n_row": list(row),
        "n_tail": list(tail),
    }


def _power_of_two_above(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


def _derived(gal: Sequence[int], jac: Sequence[int], spread: int = 3) -> Dict[str, List[int]]:
    alias = [max(spread * g, _ALIAS_FLOOR) for g in gal]
    fft = [_power_of_two_above(2 * n) for n in alias]
    col = [j + _COLUMN_MARGIN for j in jac]
    row = [sum(col)] * 2
    tail = [j + _TAIL_MARGIN for j in jac]
    return _boxes(gal, jac, alias, fft, col, row, tail)


_ONE_PEAK_C13 = {"c": 1.3, "q": _WIDE_Q, "guess": "one_peak", "amplitude": 2.0, "width": 3.0}
_TWO_PEAK_C13 = {
    "c": 1.3,
    "q": _WIDE_Q,
    "guess": "two_peak",
    "amplitude": 2.0,
    "width": 3.0,
    "separation": 16.0,
}
_COMBINATION_C13 = {**_TWO_PEAK_C13, "q": [0.025, 0.1], "guess": "combination"}
_ONE_PEAK_C09 = {"c": 0.9, "q": [0.1, 0.1], "guess": "one_peak", "amplitude": 6.0, "width": 2.5}
_ONE_PEAK_C14 = {**_ONE_PEAK_C13, "c": 1.4, "seed_c": 1.3}

PRESETS: Dict[str, Dict] = {
    "trivial": {
        "c": 1.3,
        "q": _WIDE_Q,
        "guess": "zero",
        **_boxes((10, 10), (10, 10), (20, 20), (64, 64), (20, 20), (40, 40), (15, 15)),
    },
    "one-peak-c1.1": {
        "c": 1.1,
        "q": _ONE_PEAK_Q,
        "guess": "one_peak",
        "amplitude": 4.0,
        "width": 3.0,
        **_boxes(
            (130, 130), (65, 65), (400, 400), (1024, 1024), (300, 300), (800, 800), (140, 140)
        ),
    },
    "one-peak-c1.1-desk": {
        "c": 1.1,
        "q": _ONE_PEAK_Q,
        "guess": "one_peak",
        "amplitude": 4.0,
        "width": 3.0,
        **_derived((65, 65), (33, 33), spread=2),
    },
    "one-peak-c1.3": {**_ONE_PEAK_C13, **_derived((60, 20), (40, 16))},
    "one-peak-c1.3-desk": {**_ONE_PEAK_C13, **_derived((60, 20), (36, 14), spread=2)},
    "two-peak-c1.3": {**_TWO_PEAK_C13, **_derived((100, 60), (50, 30))},
    "two-peak-c1.3-desk": {**_TWO_PEAK_C13, **_derived((50, 30), (36, 15), spread=2)},
    "combination-c1.3": {**_COMBINATION_C13, **_derived((200, 49), (100, 25))},
    "combination-c1.3-desk": {**_COMBINATION_C13, **_derived((100, 25), (72, 16), spread=2)},
    "one-peak-c0.9": {**_ONE_PEAK_C09, **_derived((60, 60), (30, 30))},
    "one-peak-c0.9-desk": {**_ONE_PEAK_C09, **_derived((30, 30), (16, 16), spread=2)},
    "one-peak-c1.4": {**_ONE_PEAK_C14, **_derived((80, 40), (40, 16))},
    "one-peak-c1.4-desk": {**_ONE_PEAK_C14, **_derived((40, 20), (38, 14), spread=2)},
}


def preset_names() -> List[str]:
    return sorted(PRESETS)


def get_preset(name: str) -> Dict:
    """A fresh copy of the preset ``name``.

    Raises:
        ConstraintViolation: for an unknown name
    """
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConstraintViolation(
            "preset", f"unknown preset {name!r}, expected one of {preset_names()}"
        ) from None
