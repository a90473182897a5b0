"""Small dense Hermitian helpers shared by the event and detection code."""
from __future__ import annotations

import numpy as np


def inverse_sqrt_hermitian(
    matrix: np.ndarray, floor: float = 1e-12, drop_below: float | None = None
) -> np.ndarray:
    """Inverse Hermitian square root via eigendecomposition.

    By default eigenvalues are floored at ``floor`` to guard near-singular
    inputs.  With ``drop_below`` set, eigendirections whose eigenvalue is
    below ``drop_below * max_eigenvalue`` get weight zero instead (a
    pseudo-inverse root), which is what whitening against a covariance
    with a structurally dead direction needs.  Genuinely indefinite
    matrices are rejected either way.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(matrix, matrix.conj().T, atol=1e-8):
        raise ValueError("matrix square root needs a Hermitian input")
    if matrix.shape[0] == 0:
        return np.zeros((0, 0))
    vals, vecs = np.linalg.eigh(matrix)
    scale = max(float(vals[-1]), floor)
    if vals[0] < -1e-8 * scale:
        raise ValueError(
            f"matrix square root failed: eigenvalue {vals[0]:.3e} is negative"
        )
    if drop_below is not None:
        cut = drop_below * scale
        weights = np.where(vals > cut, 1.0 / np.sqrt(np.maximum(vals, cut)), 0.0)
        return (vecs * weights) @ vecs.conj().T
    vals = np.maximum(vals, floor)
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    """Symmetrize away roundoff asymmetry."""
    matrix = np.asarray(matrix)
    return 0.5 * (matrix + matrix.conj().T)
