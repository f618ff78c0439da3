# Copyright 2026 pairsys.ai (DBA Goodmem.ai)
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Shared pytest fixtures."""

from __future__ import annotations

import math

import numpy as np
import pytest

from broken_virasoro.algebroid import BrokenField
from broken_virasoro.geometry import BreakConfig


@pytest.fixture()
def sin_arc() -> BreakConfig:
    """Breaks at 0 and pi."""
    return BreakConfig((0.0, math.pi))


@pytest.fixture()
def e1(sin_arc: BreakConfig) -> BrokenField:
    """``sin(x) d/dx``, vanishing at 0 and pi."""
    return BrokenField(sin_arc, ["sin(x)"])


@pytest.fixture()
def e2(sin_arc: BreakConfig) -> BrokenField:
    """``sin(2x) d/dx``."""
    return BrokenField(sin_arc, ["sin(2*x)"])


@pytest.fixture()
def e3(sin_arc: BreakConfig) -> BrokenField:
    """``sin(3x) d/dx``."""
    return BrokenField(sin_arc, ["sin(3*x)"])


@pytest.fixture()
def rng() -> np.random.Generator:
    """A seeded generator; tests stay deterministic."""
    return np.random.default_rng(20260101)
