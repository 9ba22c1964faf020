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

"""Coefficient, interval and matrix dumps.

Text dumps are CSV with one ``n1,n2,...`` row per index. Binary dumps start with
a single JSON header line holding the dimensions, the flat index layout tag
and the sha256 of the little-endian float64 payload that follows.
"""

import csv
import hashlib
import json
import os
from typing import Dict, Tuple

import numpy as np
from covalent._shared_files import logger

from .coeffs import FLAT_INDEX_LAYOUT, CoeffGrid, IndexPair, flat_indices
from .interval import Interval, format_interval, parse_interval

app_log = logger.app_log
log_stack_info = logger.log_stack_info

BINARY_MAGIC = "sbwave-dump-v1"


def array_digest(values: np.ndarray) -> str:
    """sha256 of the C-ordered little-endian float64 bytes of ``values``."""
    payload = np.ascontiguousarray(values, dtype="<f8").tobytes()
    return hashlib.sha256(payload).hexdigest()


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_coeff_csv(path: str, grid: CoeffGrid) -> str:
    """Write ``n1,n2,value`` rows, or ``n1,n2,lo,hi`` for interval grids."""
    _ensure_parent(path)
    n1, n2 = flat_indices(grid.dims)
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            if grid.is_interval:
                writer.writerow(["n1", "n2", "lo", "hi"])
                lo, hi = grid.values.lo.ravel(), grid.values.hi.ravel()
                for i, j, low, high in zip(n1, n2, lo, hi):
                    writer.writerow([int(i), int(j), repr(float(low)), repr(float(high))])
            else:
                writer.writerow(["n1", "n2", "value"])
                for i, j, value in zip(n1, n2, grid.values.ravel()):
                    writer.writerow([int(i), int(j), repr(float(value))])
    except OSError as e:
        app_log.exception(e)
        raise
    app_log.debug(f"Wrote {grid!r} to {path}")
    return path


def read_coeff_csv(path: str) -> CoeffGrid:
    """Read a grid written by ``write_coeff_csv``; missing indices are zero."""
    try:
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as e:
        app_log.exception(e)
        raise
    if not rows:
        raise ValueError(f"{path} holds no coefficients")
    index = np.array([[int(r["n1"]), int(r["n2"])] for r in rows])
    shape = (int(index[:, 0].max()) + 1, int(index[:, 1].max()) + 1)
    if "lo" in rows[0]:
        lo = np.zeros(shape)
        hi = np.zeros(shape)
        lo[index[:, 0], index[:, 1]] = [float(r["lo"]) for r in rows]
        hi[index[:, 0], index[:, 1]] = [float(r["hi"]) for r in rows]
        return CoeffGrid(Interval(lo, hi))
    values = np.zeros(shape)
    values[index[:, 0], index[:, 1]] = [float(r["value"]) for r in rows]
    return CoeffGrid(values)


def write_interval_csv(path: str, values: Interval) -> str:
    """Interval grid as ``n1,n2,interval`` rows with ``[lo,hi]`` decimal strings."""
    _ensure_parent(path)
    dims = (values.shape[0] - 1, values.shape[1] - 1)
    n1, n2 = flat_indices(dims)
    flat_values = values.ravel()
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["n1", "n2", "interval"])
            for k in range(n1.size):
                writer.writerow([int(n1[k]), int(n2[k]), format_interval(flat_values[k])])
    except OSError as e:
        app_log.exception(e)
        raise
    return path


def read_interval_csv(path: str) -> Interval:
    try:
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as e:
        app_log.exception(e)
        raise
    index = np.array([[int(r["n1"]), int(r["n2"])] for r in rows])
    shape = (int(index[:, 0].max()) + 1, int(index[:, 1].max()) + 1)
    out = Interval.zeros(shape)
    for (i, j), row in zip(index, rows):
        out[i, j] = parse_interval(row["interval"])
    return out


def _write_binary(path: str, header: Dict, payload: np.ndarray) -> str:
    _ensure_parent(path)
    data = np.ascontiguousarray(payload, dtype="<f8")
    header = dict(header, magic=BINARY_MAGIC, dtype="<f8", shape=list(data.shape))
    header["sha256"] = array_digest(data)
    try:
        with open(path, "wb") as f:
            f.write(json.dumps(header, sort_keys=True).encode() + b"\n")
            f.write(data.tobytes())
    except OSError as e:
        app_log.exception(e)
        raise
    return path


def _read_binary(path: str) -> Tuple[Dict, np.ndarray]:
    try:
        with open(path, "rb") as f:
            header = json.loads(f.readline().decode())
            payload = f.read()
    except OSError as e:
        app_log.exception(e)
        raise
    if header.get("magic") != BINARY_MAGIC:
        raise ValueError(f"{path} is not a {BINARY_MAGIC} file")
    data = np.frombuffer(payload, dtype="<f8").reshape(header["shape"])
    if array_digest(data) != header["sha256"]:
        raise ValueError(f"Checksum mismatch in {path}")
    return header, data.astype(np.float64)


def write_coeff_binary(path: str, grid: CoeffGrid) -> str:
    """Binary dump of the grid midpoints with dims, layout tag and checksum in the header."""
    header = {"kind": "coefficients", "dims": list(grid.dims), "layout": FLAT_INDEX_LAYOUT}
    return _write_binary(path, header, grid.midpoints())


def read_coeff_binary(path: str) -> CoeffGrid:
    header, data = _read_binary(path)
    if header.get("layout") != FLAT_INDEX_LAYOUT:
        raise ValueError(f"Unsupported layout {header.get('layout')!r} in {path}")
    return CoeffGrid(data.reshape(header["dims"][0] + 1, header["dims"][1] + 1))


def write_matrix_binary(path: str, matrix: np.ndarray, n_jac: IndexPair) -> str:
    """Dump the block of ``A`` with rows and columns in flat index order over ``I+_{N_jac}``."""
    return _write_binary(
        path, {"kind": "matrix", "n_jac": list(n_jac), "layout": FLAT_INDEX_LAYOUT}, matrix
    )


def read_matrix_binary(path: str) -> Tuple[np.ndarray, IndexPair]:
    header, data = _read_binary(path)
    return data, tuple(header["n_jac"])


def load_coefficients(path: str) -> CoeffGrid:
    """Read coefficients from a CSV or binary dump, chosen by file extension."""
    if path.endswith(".csv"):
        return read_coeff_csv(path)
    return read_coeff_binary(path)
