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

"""``sbwave`` command line.

Verbs: ``solve``, ``prove``, ``continue``, ``parity`` and ``check-cert``. Every
run writes into one fresh run directory holding a ``manifest.json`` with the
resolved configuration, the final status and the sha256 of every file written.
The exit code is 0 only when the run converged or the proof succeeded.
"""

import argparse
import hashlib
import json
import os
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from covalent._shared_files import logger

from .coeffs import CoeffGrid, evaluate_u
from .dumps import (
    load_coefficients,
    write_coeff_binary,
    write_coeff_csv,
    write_interval_csv,
    write_matrix_binary,
)
from .exceptions import (
    CertificateError,
    ConstraintViolation,
    ConvergenceError,
    RadiiPolynomialError,
)
from .power_series import parity_experiment, write_parity_csv
from .presets import preset_names
from .problem import ProblemParams
from .proof import check_cert, run_proof, save_certificate
from .run_config import RunConfig, dump_run_config, load_run_config
from .solver import continuation, solve, write_branch_csv

app_log = logger.app_log
log_stack_info = logger.log_stack_info

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def export_profile(
    a_bar: CoeffGrid, params: ProblemParams, points: Sequence[int], path: str
) -> str:
    """Write ``x1,x2,u`` on a uniform grid of the extended period ``[-L1,L1] x [-L2,L2]``."""
    L1, L2 = params.half_periods
    x1 = np.linspace(-L1, L1, int(points[0]))
    x2 = np.linspace(-L2, L2, int(points[1]))
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    u = evaluate_u(a_bar, params.q, X1, X2)
    table = np.column_stack([X1.ravel(), X2.ravel(), u.ravel()])
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    try:
        np.savetxt(path, table, delimiter=",", header="x1,x2,u", comments="", fmt="%.17g")
    except OSError as e:
        app_log.exception(e)
        raise
    return path


def _file_digest(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class RunDirectory:
    """One run's output directory and the files recorded in its manifest."""

    def __init__(self, root: str, label: str) -> None:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        self.path = os.path.join(root, f"{label}-{stamp}")
        suffix = 1
        while os.path.exists(self.path):
            self.path = os.path.join(root, f"{label}-{stamp}-{suffix}")
            suffix += 1
        os.makedirs(self.path)
        self.files: List[str] = []

    def __call__(self, name: str) -> str:
        """Absolute path of ``name`` inside the run, recorded for the manifest."""
        self.files.append(name)
        return os.path.join(self.path, name)

    def write_manifest(self, config: RunConfig, status: str, extra: Dict[str, Any]) -> str:
        manifest = {
            "mode": config.mode,
            "status": status,
            "config": config.to_dict(),
            "files": {
                name: _file_digest(os.path.join(self.path, name))
                for name in self.files
                if os.path.isfile(os.path.join(self.path, name))
            },
            **extra,
        }
        path = os.path.join(self.path, "manifest.json")
        try:
            with open(path, "w") as f:
                json.dump(manifest, f, indent=2, sort_keys=True, default=repr)
        except OSError as e:
            app_log.exception(e)
            raise
        return path


def _write_coefficients(run: RunDirectory, a_bar: CoeffGrid, config: RunConfig) -> None:
    write_coeff_csv(run("a_bar.csv"), a_bar)
    write_coeff_binary(run("a_bar.bin"), a_bar)
    export_profile(a_bar, config.params, config.profile_points, run("profile.csv"))


def _approximate_zero(config: RunConfig) -> CoeffGrid:
    n_gal = config.trunc.n_gal
    if config.solver.guess == "from_file":
        return load_coefficients(config.solver.a_bar_file).resized(n_gal)
    return solve(config.params, n_gal, config.solver)


def run_solve(config: RunConfig, run: RunDirectory) -> Tuple[int, str, Dict[str, Any]]:
    try:
        a_bar = solve(config.params, config.trunc.n_gal, config.solver)
    except ConvergenceError as e:
        return EXIT_FAILED, "failed(newton)", {"residual": e.residual}
    _write_coefficients(run, a_bar, config)
    return EXIT_OK, "converged", {}


def run_prove(config: RunConfig, run: RunDirectory) -> Tuple[int, str, Dict[str, Any]]:
    try:
        a_bar = _approximate_zero(config)
    except ConvergenceError as e:
        return EXIT_FAILED, "failed(newton)", {"residual": e.residual}
    _write_coefficients(run, a_bar, config)
    outcome = run_proof(
        config.params,
        config.trunc,
        config.norm,
        config.analyticity,
        a_bar,
        threads=config.threads,
        r_star=config.r_star,
    )
    cert = outcome.certificate
    save_certificate(cert, run("certificate.json"))
    for variant, enclosed in outcome.enclosed.items():
        write_interval_csv(run(f"b_fft_{variant.value}.csv"), enclosed.fft_part)
    if outcome.operator is not None:
        write_matrix_binary(run("A_block.bin"), outcome.operator.block, outcome.operator.n_jac)
    code = EXIT_OK if cert.proven else EXIT_FAILED
    return code, cert.status, {"r_min": cert.r_min, "timing": cert.timing}


def run_continue(config: RunConfig, run: RunDirectory) -> Tuple[int, str, Dict[str, Any]]:
    try:
        base = solve(config.params, config.trunc.n_gal, config.solver)
    except ConvergenceError as e:
        return EXIT_FAILED, "failed(newton)", {"residual": e.residual}
    records = continuation(config.params, config.c_end, config.step, base, config.solver)
    write_branch_csv(run("branch.csv"), records, coeff_dir=os.path.join(run.path, "branch"))
    run.files.extend(os.path.relpath(r.coeff_path, run.path) for r in records if r.coeff_path)
    converged = all(r.converged for r in records)
    status = "converged" if converged else f"failed(continuation stopped at c={records[-1].c:g})"
    return (EXIT_OK if converged else EXIT_FAILED), status, {"points": len(records)}


def run_parity(config: RunConfig, run: RunDirectory) -> Tuple[int, str, Dict[str, Any]]:
    try:
        branches = parity_experiment(
            (config.params.c, config.c_end),
            config.orders,
            config.params,
            config.trunc.n_gal,
            step=config.step,
            cfg=config.solver,
            threads=config.threads,
        )
    except ConvergenceError as e:
        return EXIT_FAILED, "failed(newton)", {"residual": e.residual}
    sup_path, ell1_path = write_parity_csv(run("parity.csv"), branches)
    run.files.append(os.path.basename(ell1_path))
    started = all(records and records[0].converged for records in branches.values())
    extra = {"points": {str(m): len(r) for m, r in branches.items()}}
    return (EXIT_OK if started else EXIT_FAILED), ("converged" if started else "failed"), extra


RUNNERS = {
    "solve": run_solve,
    "prove": run_prove,
    "continue": run_continue,
    "parity": run_parity,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbwave",
        description="Traveling waves of the 2D suspension bridge equation, solved and proven.",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    def run_options(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", help="TOML run configuration")
        sub.add_argument("--preset", choices=preset_names(), help="Named configuration")
        sub.add_argument("--out-dir", dest="out_dir", help="Root for run directories")
        sub.add_argument("--threads", type=int, help="Worker threads")

    run_options(verbs.add_parser("solve", help="Newton solve for an approximate zero"))
    prove = verbs.add_parser("prove", help="Solve, then attempt a proof")
    run_options(prove)
    prove.add_argument("--a-bar", dest="a_bar_file", help="Prove this candidate instead")
    for name, help_text in (
        ("continue", "Continue a branch in the wave speed"),
        ("parity", "Compare truncated-series branches of several orders"),
    ):
        sub = verbs.add_parser(name, help=help_text)
        run_options(sub)
        sub.add_argument("--c-end", dest="c_end", type=float, help="Final wave speed")
        sub.add_argument("--step", type=float, help="Continuation step in c")
        if name == "parity":
            sub.add_argument("--orders", type=int, nargs="+", help="Series orders M")

    check = verbs.add_parser("check-cert", help="Verify a certificate without recomputation")
    check.add_argument("certificate", help="certificate.json")
    check.add_argument("--a-bar", dest="a_bar_file", help="Coefficients to match the digest")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from ``--config`` and/or ``--preset`` with command line overrides."""
    overrides = {
        "mode": args.verb,
        "out_dir": args.out_dir,
        "threads": args.threads,
        "c_end": getattr(args, "c_end", None),
        "step": getattr(args, "step", None),
        "orders": getattr(args, "orders", None),
    }
    if getattr(args, "a_bar_file", None):
        overrides.update(guess="from_file", a_bar_file=args.a_bar_file)
    if args.preset:
        overrides["preset"] = args.preset
    if args.config:
        return load_run_config(args.config, overrides)
    if not args.preset:
        raise ConstraintViolation("config", "give --config, --preset or both")
    return RunConfig.from_dict({k: v for k, v in overrides.items() if v is not None})


def check_certificate(path: str, a_bar_file: Optional[str] = None) -> int:
    a_bar = load_coefficients(a_bar_file) if a_bar_file else None
    try:
        cert = check_cert(path, a_bar)
    except RadiiPolynomialError as e:
        print(f"failed({e.condition})")
        return EXIT_FAILED
    except CertificateError as e:
        print(f"invalid certificate: {e}")
        return EXIT_FAILED
    print(f"verified: r_min={cert.r_min!r} r_max={cert.r_max!r}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "check-cert":
        return check_certificate(args.certificate, args.a_bar_file)
    try:
        config = load_config(args)
    except ConstraintViolation as e:
        print(f"invalid configuration ({e.constraint}): {e}", file=sys.stderr)
        return EXIT_CONFIG

    run = RunDirectory(config.out_dir, f"{config.preset or 'run'}-{config.mode}")
    try:
        with open(run("run.toml"), "w") as f:
            f.write(dump_run_config(config))
    except OSError as e:
        app_log.exception(e)
        raise
    started = time.perf_counter()
    code, status, extra = RUNNERS[config.mode](config, run)
    extra["elapsed"] = time.perf_counter() - started
    run.write_manifest(config, status, extra)
    print(f"{config.mode}: {status} ({run.path})")
    return code


if __name__ == "__main__":
    sys.exit(main())
