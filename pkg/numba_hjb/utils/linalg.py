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

"""Square roots of symmetric positive semi-definite matrices."""

import numpy as np
from scipy import linalg

from numba_hjb.utils.constants import numerics

__all__ = ["symmetrize", "psd_sqrt", "psd_inv_sqrt"]


def symmetrize(mat):
    mat = np.asarray(mat, dtype=np.float64)
    return 0.5 * (mat + mat.T)


def _eigh(mat):
    evals, evecs = linalg.eigh(symmetrize(mat))
    return evals, evecs


def psd_sqrt(mat):
    """Symmetric square root, negative round-off eigenvalues set to zero."""
    evals, evecs = _eigh(mat)
    roots = np.sqrt(np.clip(evals, 0.0, None))
    return symmetrize((evecs * roots) @ evecs.T)


def psd_inv_sqrt(mat, eps_reg=numerics.EPS_REG):
    """Pseudo-inverse square root of a PSD matrix.

    Eigenvalues below ``eps_reg * max`` are treated as exact zeros.

    Args:
        mat: symmetric PSD matrix.
        eps_reg: relative cutoff.

    Returns:
        A pair ``(inv_sqrt, basis)`` where ``basis`` holds the retained
        eigenvectors as columns.
    """
    evals, evecs = _eigh(mat)
    top = evals.max() if evals.size else 0.0
    if top <= 0.0:
        n = evals.size
        return np.zeros((n, n)), np.zeros((n, 0))
    keep = evals > eps_reg * top
    basis = evecs[:, keep]
    inv_sqrt = (basis / np.sqrt(evals[keep])) @ basis.T
    return symmetrize(inv_sqrt), basis
