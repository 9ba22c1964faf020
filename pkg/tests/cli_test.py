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

"""Tests for the sbwave command line"""

import json
import os

import numpy as np
import pytest

from covalent_sbwave.cli import (
    EXIT_CONFIG,
    EXIT_FAILED,
    EXIT_OK,
    RunDirectory,
    export_profile,
    main,
)
from covalent_sbwave.coeffs import CoeffGrid
from covalent_sbwave.dumps import write_coeff_csv
from covalent_sbwave.problem import ProblemParams


def only_run(root):
    (name,) = os.listdir(root)
    return os.path.join(root, name)


def read_manifest(run_path):
    with open(os.path.join(run_path, "manifest.json")) as f:
        return json.load(f)


@pytest.fixture(scope="module")
def proven_run(tmp_path_factory):
    root = str(tmp_path_factory.mktemp("runs"))
    code = main(["prove", "--preset", "trivial", "--out-dir", root, "--threads", "2"])
    return code, only_run(root)


def test_prove_writes_the_run_directory(proven_run):
    code, run_path = proven_run
    assert code == EXIT_OK
    manifest = read_manifest(run_path)
    assert manifest["status"] == "proven"
    assert manifest["mode"] == "prove"
    assert manifest["config"]["threads"] == 2
    for name in ("run.toml", "a_bar.csv", "a_bar.bin", "profile.csv", "certificate.json"):
        assert name in manifest["files"]
    assert "b_fft_Gp.csv" in manifest["files"]
    assert "A_block.bin" in manifest["files"]
    assert os.path.basename(run_path).startswith("trivial-prove-")


def test_check_cert_verifies(proven_run, capsys):
    _, run_path = proven_run
    certificate = os.path.join(run_path, "certificate.json")
    a_bar = os.path.join(run_path, "a_bar.bin")
    assert main(["check-cert", certificate, "--a-bar", a_bar]) == EXIT_OK
    assert capsys.readouterr().out.startswith("verified")


def test_check_cert_names_the_broken_condition(proven_run, tmp_path, capsys):
    _, run_path = proven_run
    with open(os.path.join(run_path, "certificate.json")) as f:
        data = json.load(f)
    data["Y"] = repr(10.0)
    forged = tmp_path / "forged.json"
    forged.write_text(json.dumps(data))
    assert main(["check-cert", str(forged)]) == EXIT_FAILED
    assert capsys.readouterr().out.strip() == "failed(2YW<(1-Z)^2)"


def test_check_cert_with_other_coefficients(proven_run, tmp_path, capsys):
    _, run_path = proven_run
    other = write_coeff_csv(str(tmp_path / "other.csv"), CoeffGrid.unit((1, 0), (10, 10)))
    certificate = os.path.join(run_path, "certificate.json")
    assert main(["check-cert", certificate, "--a-bar", other]) == EXIT_FAILED
    assert capsys.readouterr().out.startswith("invalid certificate")


def test_no_configuration_is_a_config_error(tmp_path, capsys):
    assert main(["solve", "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    assert "(config)" in capsys.readouterr().err
    assert os.listdir(tmp_path) == []


def test_bad_file_is_a_config_error(tmp_path, capsys):
    config = tmp_path / "run.toml"
    config.write_text('preset = "trivial"\nn_fft = [48, 64]\n')
    argv = ["prove", "--config", str(config), "--out-dir", str(tmp_path / "runs")]
    assert main(argv) == EXIT_CONFIG
    assert "(N_fft=2^k)" in capsys.readouterr().err


def test_solve(tmp_path, capsys):
    assert main(["solve", "--preset", "trivial", "--out-dir", str(tmp_path)]) == EXIT_OK
    run_path = only_run(str(tmp_path))
    assert os.path.isfile(os.path.join(run_path, "a_bar.csv"))
    assert capsys.readouterr().out.startswith("solve: converged")


def test_continue(tmp_path):
    argv = ["continue", "--preset", "trivial", "--out-dir", str(tmp_path)]
    assert main(argv + ["--c-end", "1.28", "--step", "0.01"]) == EXIT_OK
    manifest = read_manifest(only_run(str(tmp_path)))
    assert manifest["points"] == 3
    assert os.path.join("branch", "a_bar_0002.csv") in manifest["files"]


def test_parity(tmp_path):
    argv = ["parity", "--preset", "trivial", "--out-dir", str(tmp_path), "--c-end", "1.28"]
    assert main(argv + ["--step", "0.02", "--orders", "3", "2"]) == EXIT_OK
    run_path = only_run(str(tmp_path))
    manifest = read_manifest(run_path)
    assert manifest["points"] == {"3": 2, "2": 2}
    assert "parity_ell1.csv" in manifest["files"]


def test_prove_a_given_candidate(tmp_path):
    candidate = write_coeff_csv(str(tmp_path / "zero.csv"), CoeffGrid.zeros((10, 10)))
    argv = ["prove", "--preset", "trivial", "--out-dir", str(tmp_path / "runs")]
    assert main(argv + ["--a-bar", candidate]) == EXIT_OK
    manifest = read_manifest(only_run(str(tmp_path / "runs")))
    assert manifest["config"]["guess"] == "from_file"


def test_run_directories_do_not_collide(tmp_path):
    first = RunDirectory(str(tmp_path), "run-solve")
    second = RunDirectory(str(tmp_path), "run-solve")
    assert first.path != second.path
    assert first("a.csv") == os.path.join(first.path, "a.csv")
    assert first.files == ["a.csv"]


def test_profile_export(tmp_path):
    params = ProblemParams(1.3, (0.5, 1.0))
    path = export_profile(CoeffGrid.unit((1, 0)), params, (5, 3), str(tmp_path / "p.csv"))
    table = np.loadtxt(path, delimiter=",", skiprows=1)
    assert table.shape == (15, 3)
    assert table[:, 0].min() == pytest.approx(-2 * np.pi)
    centre = table[(table[:, 0] == 0) & (table[:, 1] == 0)]
    assert centre[0, 2] == pytest.approx(2.0)
