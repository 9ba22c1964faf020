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

"""Exceptions raised by the suspension bridge proof pipeline."""


class IntervalError(ArithmeticError):
    """An interval operation produced an empty or NaN enclosure."""


class IntervalDivisionError(IntervalError, ZeroDivisionError):
    """Division by an interval that contains zero."""


class ConstraintViolation(ValueError):
    """A truncation or parameter constraint does not hold.

    Args:
        constraint: Short name of the violated constraint, e.g. ``N_tail<=N_col``
        message: Actionable description of what to change
    """

    def __init__(self, constraint: str, message: str) -> None:
        self.constraint = constraint
        super().__init__(f"{constraint}: {message}")


class ConvergenceError(RuntimeError):
    """Newton iteration did not reach the residual tolerance."""

    def __init__(self, message: str, residual: float = float("nan")) -> None:
        self.residual = residual
        super().__init__(message)


class RadiiPolynomialError(RuntimeError):
    """The radii polynomial inequalities could not be verified.

    Args:
        condition: The inequality that failed, one of ``Z<1``, ``2YW<(1-Z)^2``
            or ``r_min<r_max``
    """

    def __init__(self, condition: str, message: str = "") -> None:
        self.condition = condition
        super().__init__(f"{condition} violated" + (f": {message}" if message else ""))


class CertificateError(ValueError):
    """A certificate file is malformed or does not match its content digest."""
