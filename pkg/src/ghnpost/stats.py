"""Channel-wise Pearson correlation statistics.

A "channel" is row k of the K x CHW view of a rank-2/4 weight tensor.
All accumulation runs in float64 regardless of storage dtype, so that
correlations of near-identical channels stay stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChannelTooShort, TooFewChannels, UnsupportedRank


@dataclass
class CorrelationMatrix:
    """Symmetric K x K Pearson correlation between output channels."""

    values: np.ndarray  # float64, entries in [-1, 1], unit diagonal

    @property
    def k(self) -> int:
        return self.values.shape[0]


@dataclass
class Histogram:
    bin_edges: np.ndarray  # len bins + 1, spanning [-1, 1]
    counts: np.ndarray  # len bins, non-negative ints


def channel_correlation(w: np.ndarray) -> CorrelationMatrix:
    """Pearson correlation between the K channels of a rank-2/4 tensor.

    Zero-variance channels correlate 0 with everything off-diagonal; the
    diagonal is 1 by convention, so downstream noise scaling stays finite.
    """
    if w.ndim not in (2, 4):
        raise UnsupportedRank(f"expected rank 2 or 4 tensor, got rank {w.ndim}")
    k = w.shape[0]
    chw = math.prod(w.shape[1:])
    if chw < 2:
        raise ChannelTooShort(f"channels have {chw} elements, need at least 2")
    x = w.reshape(k, chw).astype(np.float64)
    xc = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.sum(xc * xc, axis=1))
    safe = np.where(norms == 0.0, 1.0, norms)
    r = (xc @ xc.T) / np.outer(safe, safe)
    dead = norms == 0.0
    r[dead, :] = 0.0
    r[:, dead] = 0.0
    r = 0.5 * (r + r.T)  # GEMM output is not exactly symmetric
    # Exactly collinear channels compute as +-1 give or take a few ulp
    # (numerator and denominator round the same sum differently).  Snap
    # them back so identical channels yield a constant distribution with
    # std exactly 0, which the no-noise degenerate contract relies on.
    snap = 64.0 * np.finfo(np.float64).eps
    r[np.abs(r - 1.0) <= snap] = 1.0
    r[np.abs(r + 1.0) <= snap] = -1.0
    np.clip(r, -1.0, 1.0, out=r)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(values=r)


def offdiagonal_values(r: CorrelationMatrix) -> np.ndarray:
    """Upper-triangle off-diagonal entries, row-major order."""
    iu = np.triu_indices(r.k, k=1)
    return r.values[iu]


def correlation_std(r: CorrelationMatrix) -> float:
    """Population standard deviation of the off-diagonal correlations.

    The diagonal is constant 1 and carries no information, so it is
    excluded.  Requires at least two channels.
    """
    if r.k < 2:
        raise TooFewChannels(f"need k >= 2 channels, got {r.k}")
    return float(np.std(offdiagonal_values(r)))


def correlation_histogram(r: CorrelationMatrix, bins: int) -> Histogram:
    """Equal-width histogram of the off-diagonal correlations over [-1, 1].

    Values exactly 1.0 land in the last bin; entries a hair outside the
    range from rounding are clipped so every off-diagonal entry is counted.
    """
    if r.k < 2:
        raise TooFewChannels(f"need k >= 2 channels, got {r.k}")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    vals = np.clip(offdiagonal_values(r), -1.0, 1.0)
    counts, edges = np.histogram(vals, bins=bins, range=(-1.0, 1.0))
    return Histogram(bin_edges=edges, counts=counts)
