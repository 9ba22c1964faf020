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

"""Tests for coefficient, interval and matrix dumps"""

import json

import numpy as np
import pytest

from covalent_sbwave.coeffs import CoeffGrid
from covalent_sbwave.dumps import (
    BINARY_MAGIC,
    array_digest,
    load_coefficients,
    read_coeff_binary,
    read_coeff_csv,
    read_interval_csv,
    read_matrix_binary,
    write_coeff_binary,
    write_coeff_csv,
    write_interval_csv,
    write_matrix_binary,
)
from covalent_sbwave.interval import Interval


@pytest.fixture
def grid():
    values = np.array([[1.0, -0.25, 0.0], [1e-300, 0.1, 2.0 / 3.0]])
    return CoeffGrid(values)


def test_digest_is_layout_sensitive():
    values = np.arange(6.0).reshape(2, 3)
    assert array_digest(values) == array_digest(values.copy())
    assert array_digest(values) != array_digest(values.T)
    assert len(array_digest(values)) == 64


def test_coefficient_csv(tmp_path, grid):
    path = write_coeff_csv(str(tmp_path / "out" / "a_bar.csv"), grid)
    with open(path) as f:
        assert f.readline().strip() == "n1,n2,value"
        assert f.readline().strip() == "0,0,1.0"
    back = read_coeff_csv(path)
    assert np.array_equal(back.values, grid.values)


def test_interval_coefficient_csv(tmp_path):
    grid = CoeffGrid(Interval(np.array([[0.0, 0.1]]), np.array([[0.0, 0.30000000000000004]])))
    back = read_coeff_csv(write_coeff_csv(str(tmp_path / "a.csv"), grid))
    assert back.is_interval
    assert np.array_equal(back.values.hi, grid.values.hi)


def test_sparse_csv_fills_zeros(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("n1,n2,value\n2,1,0.5\n")
    back = read_coeff_csv(str(path))
    assert back.dims == (2, 1)
    assert back.midpoints()[2, 1] == 0.5
    assert np.count_nonzero(back.midpoints()) == 1


def test_empty_csv(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("n1,n2,value\n")
    with pytest.raises(ValueError):
        read_coeff_csv(str(path))


def test_interval_csv_encloses(tmp_path):
    values = Interval(np.array([[0.1, -1.0], [2.0, 3.0]]), np.array([[0.2, -0.5], [2.0, 4.0]]))
    back = read_interval_csv(write_interval_csv(str(tmp_path / "b.csv"), values))
    assert np.all(back.lo <= values.lo)
    assert np.all(back.hi >= values.hi)


def test_binary_dump(tmp_path, grid):
    path = write_coeff_binary(str(tmp_path / "a_bar.bin"), grid)
    with open(path, "rb") as f:
        header = json.loads(f.readline())
    assert header["magic"] == BINARY_MAGIC
    assert header["dims"] == [1, 2]
    assert header["layout"] == "row-major-n2-fastest"
    assert header["sha256"] == array_digest(grid.values)
    assert np.array_equal(read_coeff_binary(path).values, grid.values)
    assert np.array_equal(load_coefficients(path).values, grid.values)


def test_binary_checksum(tmp_path, grid):
    path = write_coeff_binary(str(tmp_path / "a_bar.bin"), grid)
    with open(path, "rb") as f:
        raw = bytearray(f.read())
    raw[-1] ^= 0x01
    with open(path, "wb") as f:
        f.write(raw)
    with pytest.raises(ValueError, match="Checksum"):
        read_coeff_binary(path)


def test_not_a_dump(tmp_path):
    path = tmp_path / "a.bin"
    path.write_bytes(b'{"magic": "other"}\n')
    with pytest.raises(ValueError, match=BINARY_MAGIC):
        read_coeff_binary(str(path))


def test_matrix_dump(tmp_path):
    matrix = np.arange(16.0).reshape(4, 4)
    path = write_matrix_binary(str(tmp_path / "A.bin"), matrix, (1, 1))
    matrix, n_jac = read_matrix_binary(path)
    assert n_jac == (1, 1)
    assert np.array_equal(matrix, np.arange(16.0).reshape(4, 4))


def test_missing_file(tmp_path, mocker):
    app_log_mock = mocker.patch("covalent_sbwave.dumps.app_log")
    with pytest.raises(OSError):
        load_coefficients(str(tmp_path / "absent.csv"))
    app_log_mock.exception.assert_called_once()
