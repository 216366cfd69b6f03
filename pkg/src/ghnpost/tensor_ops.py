"""Reshaping between parameter tensors and their 2D matrix form.

A rank-4 tensor (K, C, H, W) flattens row-major to a K x CHW matrix; a
rank-2 tensor (K, C) takes the same path with H = W = 1.  Whenever
K < CHW the matrix is transposed so that the result always has at least
as many rows as columns, which is what the QR step downstream requires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedRank


@dataclass
class Matricized:
    """2D view of a parameter tensor plus the bookkeeping to undo it."""

    data: np.ndarray  # 2D, row-major
    transposed: bool
    original_shape: tuple[int, ...]

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


def matricize(w: np.ndarray) -> Matricized:
    """Reshape a rank-2/4 tensor to K x CHW, transposing if K < CHW.

    Raises UnsupportedRank for any other rank.  The value multiset and
    dtype are preserved exactly; ``dematricize`` is its exact inverse.
    """
    if w.ndim not in (2, 4):
        raise UnsupportedRank(f"expected rank 2 or 4 tensor, got rank {w.ndim}")
    k = w.shape[0]
    chw = math.prod(w.shape[1:])
    mat = np.ascontiguousarray(w.reshape(k, chw))
    transposed = k < chw
    if transposed:
        mat = np.ascontiguousarray(mat.T)
    return Matricized(data=mat, transposed=transposed, original_shape=tuple(w.shape))


def dematricize(m: Matricized) -> np.ndarray:
    """Invert :func:`matricize`, restoring the original shape bit-exactly."""
    mat = m.data
    if m.transposed:
        mat = mat.T
    return np.ascontiguousarray(mat.reshape(m.original_shape))
