"""
Canonical evaluation of superpositions Cb and their norms.

Columns are accumulated one at a time in ascending index order and norms use
correctly rounded summation (math.fsum), so the same integer vector always
produces the same float regardless of which search produced it.
"""

import math
from typing import Sequence

import numpy as np

from src.domain.models import Codebook, NormKind, SparseIntegerVector


def superpose(codebook: Codebook, support: Sequence[int], patterns: np.ndarray) -> np.ndarray:
    """Rows of patterns @ C[:, support].T, accumulated column by column."""
    acc = np.zeros((patterns.shape[0], codebook.m))
    for position, index in enumerate(support):
        acc += patterns[:, position:position + 1] * codebook.values[:, index][np.newaxis, :]
    return acc


def row_norms(rows: np.ndarray, norm: NormKind) -> np.ndarray:
    if norm is NormKind.L1:
        return np.array([math.fsum(row) for row in np.abs(rows)])
    return np.array([math.sqrt(math.fsum(row)) for row in rows * rows])


def vector_norm(vector: np.ndarray, norm: NormKind) -> float:
    return float(row_norms(vector[np.newaxis, :], norm)[0])


def superposition_norm(codebook: Codebook, b: SparseIntegerVector) -> float:
    """||C b|| under the codebook's norm."""
    patterns = np.array([b.values], dtype=np.int64).reshape(1, b.support_size)
    return float(row_norms(superpose(codebook, b.support, patterns), codebook.norm)[0])


def residual_norm(codebook: Codebook, y: np.ndarray, b: SparseIntegerVector) -> float:
    """||y - C b|| under the codebook's norm."""
    patterns = np.array([b.values], dtype=np.int64).reshape(1, b.support_size)
    acc = superpose(codebook, b.support, patterns)
    return float(row_norms(y[np.newaxis, :] - acc, codebook.norm)[0])
