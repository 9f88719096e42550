"""Gradient-domain compositing.

Solves the discrete Poisson equation on the masked region: the output
matches the content image's gradients inside the mask and the base image
exactly outside, with Dirichlet boundary values taken from the base.
Off-grid neighbors simply drop out of the 5-point stencil.
"""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import spsolve

_NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def poisson_composite(
    content: np.ndarray, base: np.ndarray, mask: np.ndarray
) -> np.ndarray:
    """Composite ``content`` into ``base`` where ``mask`` is 1.

    ``content`` and ``base`` are (H, W, C) or (H, W) float arrays of equal
    shape; ``mask`` is (H, W). Equal content and base reproduce the base
    exactly (the gradient mismatch is zero). A mask covering the whole
    frame has no boundary condition and is rejected.
    """
    content_arr = np.asarray(content, dtype=np.float64)
    base_arr = np.asarray(base, dtype=np.float64)
    if content_arr.shape != base_arr.shape:
        raise ValueError("content and base must have identical shapes")
    flat = content_arr.ndim == 2
    if flat:
        content_arr = content_arr[..., None]
        base_arr = base_arr[..., None]
    h, w, channels = content_arr.shape
    mask_bool = np.asarray(mask) > 0.5
    if mask_bool.shape != (h, w):
        raise ValueError("mask shape must match the images")
    if not mask_bool.any():
        out = base_arr.copy()
        return out[..., 0] if flat else out
    if mask_bool.all():
        raise ValueError("mask covers the whole frame; no boundary to anchor the solve")

    index = -np.ones((h, w), dtype=np.int64)
    ys, xs = np.nonzero(mask_bool)
    n = len(ys)
    index[ys, xs] = np.arange(n)

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs = np.zeros((n, channels), dtype=np.float64)
    for k in range(n):
        i, j = int(ys[k]), int(xs[k])
        degree = 0
        for di, dj in _NEIGHBORS:
            ii, jj = i + di, j + dj
            if not (0 <= ii < h and 0 <= jj < w):
                continue
            degree += 1
            rhs[k] += content_arr[i, j] - content_arr[ii, jj]
            neighbor = index[ii, jj]
            if neighbor >= 0:
                rows.append(k)
                cols.append(int(neighbor))
                vals.append(-1.0)
            else:
                rhs[k] += base_arr[ii, jj]
        rows.append(k)
        cols.append(k)
        vals.append(float(degree))

    matrix = csr_matrix((vals, (rows, cols)), shape=(n, n))
    solution = spsolve(matrix, rhs)
    solution = np.atleast_2d(solution).reshape(n, channels)

    out = base_arr.copy()
    out[ys, xs] = solution
    return out[..., 0] if flat else out
