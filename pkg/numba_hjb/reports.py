# Copyright 2026 The numba-hjb Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import os
from dataclasses import dataclass, field

import numpy as np

from numba_hjb.utils.misc import digest

__all__ = ["CheckReport", "make_report"]


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one numerical property check.

    ``passed`` is true exactly when ``defect <= tolerance``; the tolerance is
    always an explicit input of the check and is recorded here. ``artifacts``
    holds the file names of the tables a check wrote next to its report.
    """

    name: str
    inputs_digest: str
    defect: float
    tolerance: float
    passed: bool
    artifacts: tuple = ()
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.defect >= 0:
            raise ValueError("check %s produced defect %r" % (self.name, self.defect))
        if self.passed != (self.defect <= self.tolerance):
            raise ValueError("check %s pass flag disagrees with its defect" % self.name)

    def to_dict(self):
        return {
            "name": self.name,
            "inputs_digest": self.inputs_digest,
            "defect": self.defect,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "artifacts": list(self.artifacts),
            "details": self.details,
        }


def make_report(name, inputs, defect, tolerance, artifacts=(), **details):
    """Build a :class:`CheckReport`, deriving the digest and the pass flag."""
    defect = float(defect)
    if np.isnan(defect):
        defect = np.inf
    return CheckReport(
        name=name,
        inputs_digest=digest(inputs),
        defect=defect,
        tolerance=float(tolerance),
        passed=bool(defect <= tolerance),
        artifacts=tuple(os.path.basename(a) for a in artifacts),
        details=details,
    )
