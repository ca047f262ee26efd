# Copyright (c) 2024 fixinv authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Exception hierarchy shared by every fixinv module."""


class FixinvError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(FixinvError, ValueError):
    pass


class InvalidSpec(FixinvError, ValueError):
    pass


class InvalidRadius(InvalidSpec):
    pass


class OutOfRange(FixinvError, ValueError):
    pass


class EmptyInput(FixinvError, ValueError):
    pass


class EmptyGrid(EmptyInput):
    pass


class EmptyStrategies(EmptyInput):
    pass


class ConfigParse(FixinvError, ValueError):
    pass


class NotLinear(FixinvError, TypeError):
    """The pair has no composite matrix E·D."""


class NoGradient(FixinvError, TypeError):
    """The pair exposes no decoder gradient."""


class OracleUnavailable(FixinvError, RuntimeError):
    pass


class TraceTooShort(FixinvError, RuntimeError):
    pass


class ZeroReference(FixinvError, ValueError):
    pass


class NonFiniteOutput(FixinvError, ArithmeticError):
    pass


class UnderflowStall(NonFiniteOutput):
    """Updates rounded to zero for a full stall window."""


class IoError(FixinvError, OSError):
    pass
