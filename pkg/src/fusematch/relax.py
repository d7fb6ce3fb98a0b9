"""Continuous relaxation of the association objective.

The exact problem minimizes the squared Frobenius distance between the
pairwise match pattern U U^T and every modality's score matrix, over binary
feasible assignments.  Expanding the squares shows that for such U the data
term collapses to <U U^T, abar> plus a constant, where abar fuses all
modalities into one signed affinity matrix.  The relaxation optimizes that
inner product over nonnegative U with row sums at most one, adding penalty
terms that vanish exactly on feasible binary points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Instance, build_modality_matrices


@dataclass(frozen=True)
class RelaxationData:
    """Quadratic-form data of the penalized relaxation.

    ``abar`` entry (a, b) sums 1 - 2*s over the pair's modality scores s, so
    an inconclusive 0.5 contributes nothing, strong similarity pulls the
    pair together (negative entry) and strong dissimilarity pushes it apart
    (positive entry).  ``p_o`` penalizes column overlap, ``p_d`` penalizes
    same-set co-assignment, and ``frob_const`` shifts <U U^T, abar> back to
    the original least-squares value on binary feasible points.
    """

    abar: np.ndarray
    p_o: np.ndarray
    p_d: np.ndarray
    frob_const: float

    @property
    def num_elements(self) -> int:
        return self.abar.shape[0]


def build_relaxation(instance: Instance) -> RelaxationData:
    """Fuse an instance's modality matrices into relaxation data."""
    mats = build_modality_matrices(instance).mats
    m = instance.num_elements
    abar = instance.modality_count - 2.0 * mats.sum(axis=0)
    p_o = np.ones((m, m)) - np.eye(m)
    p_d = np.zeros((m, m))
    for offset, size in zip(instance.set_offsets, instance.set_sizes):
        p_d[offset:offset + size, offset:offset + size] = 1.0
    p_d[np.arange(m), np.arange(m)] = 0.0
    frob_const = float((mats ** 2).sum())
    for mat in (abar, p_o, p_d):
        mat.setflags(write=False)
    return RelaxationData(abar=abar, p_o=p_o, p_d=p_d, frob_const=frob_const)


def _check_u(U: np.ndarray, data: RelaxationData) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != data.num_elements:
        raise ValueError(
            f"expected a matrix with {data.num_elements} rows, got shape {U.shape}")
    return U


def relaxed_objective(U: np.ndarray, data: RelaxationData, d: float) -> float:
    """Penalized relaxation value at U with penalty weight d.

    The penalty bracket sums the column overlap <U^T U, 1 - I>, the
    same-set co-assignment <U U^T, p_d>, and ||U 1 - 1||^2 - m.  Over
    the unit box it is bounded below by -m, attained exactly at binary
    feasible points, so growing d drives iterates toward feasibility.
    """
    U = _check_u(U, data)
    if (U < 0).any():
        raise ValueError("U must be nonnegative")
    if d < 0:
        raise ValueError("penalty weight must be nonnegative")
    m = data.num_elements
    gram = U @ U.T
    row_sums = U.sum(axis=1)
    overlap = float(row_sums @ row_sums) - float((U * U).sum())
    gap = row_sums - 1.0
    penalty = overlap + float((gram * data.p_d).sum()) + (float(gap @ gap) - m)
    return float((gram * data.abar).sum()) + d * penalty


def relaxed_gradient(U: np.ndarray, data: RelaxationData, d: float) -> np.ndarray:
    """Gradient of the relaxed objective with respect to U."""
    U = _check_u(U, data)
    if d < 0:
        raise ValueError("penalty weight must be nonnegative")
    grad = 2.0 * (data.abar + d * data.p_d) @ U
    if d:
        row_sums = U.sum(axis=1)
        grad += 2.0 * d * (row_sums[:, None] - U)        # U (1 - I)
        grad += 2.0 * d * (row_sums - 1.0)[:, None]      # (U 1 - 1) 1^T
    return grad


def frobenius_from_mats(U: np.ndarray, mats: np.ndarray) -> float:
    """Sum over modalities of ||U U^T - S_k||_F^2."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != mats.shape[1]:
        raise ValueError(
            f"expected a matrix with {mats.shape[1]} rows, got shape {U.shape}")
    gram = U @ U.T
    return float(((gram[None, :, :] - mats) ** 2).sum())


def frobenius_objective(U: np.ndarray, instance: Instance) -> float:
    """Exact association objective of an assignment matrix on an instance."""
    return frobenius_from_mats(U, build_modality_matrices(instance).mats)
