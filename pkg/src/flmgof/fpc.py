"""Empirical functional principal components in the quadrature metric.

The sample covariance operator of centered curves X_1..X_n is the kernel
C(s, t) = (1/n) sum_i X_i(s) X_i(t). On a grid with trapezoid weights w the
L2 eigenproblem becomes the symmetric matrix problem

    W^(1/2) C W^(1/2) u = lambda u,      e = W^(-1/2) u,

so the eigenfunctions e_j are orthonormal in the quadrature inner product and
the score columns <X_i, e_j> have sample variance (divisor n) exactly
lambda_j. When n < G the same spectrum is read off the n x n Gram matrix
instead of the G x G kernel, which is the cheaper path for short samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .funspace import FunctionalSample, Grid, _frozen

__all__ = ["FpcBasis", "compute_fpc", "reconstruct"]

# Eigenvalues below this fraction of the leading one are treated as zero and
# their eigenfunctions dropped.
RELATIVE_EIGENVALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class FpcBasis:
    """Principal component basis of a centered functional sample.

    Fields
    ------
    grid : Grid
    eigenvalues : ndarray, shape (m,)
        Non-increasing, strictly positive after the relative floor.
    eigenfunctions : ndarray, shape (m, G)
        Row j is the j-th eigenfunction, unit norm in the quadrature metric,
        sign fixed so its largest-magnitude value is positive.
    scores : ndarray, shape (n, m)
        scores[i, j] = <X_i, e_j>.
    """

    grid: Grid
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "eigenfunctions", _frozen(self.eigenfunctions))
        object.__setattr__(self, "scores", _frozen(self.scores))

    @property
    def m(self) -> int:
        """Number of retained components."""
        return int(self.eigenvalues.size)

    @property
    def n(self) -> int:
        return int(self.scores.shape[0])


def compute_fpc(sample: FunctionalSample, max_rank: int | None = None) -> FpcBasis:
    """Eigendecompose the sample covariance operator of a centered sample.

    Parameters
    ----------
    sample : FunctionalSample
        Must be centered (`sample.centered` is True) with n >= 2.
    max_rank : int, optional
        Upper bound on the number of retained components; defaults to
        min(n - 1, G). Fewer may be returned when trailing eigenvalues fall
        below the relative floor.
    """
    if not sample.centered:
        raise ValueError("compute_fpc requires a centered sample")
    n, num_points = sample.data.shape
    if n < 2:
        raise ValueError("principal components need at least two curves")
    limit = min(n - 1, num_points)
    if max_rank is None:
        max_rank = limit
    if not 1 <= max_rank <= limit:
        raise ValueError(f"max_rank must lie in [1, {limit}], got {max_rank}")

    sqrt_w = np.sqrt(sample.grid.weights)
    weighted = sample.data * sqrt_w  # n x G

    if n <= num_points:
        gram = (weighted @ weighted.T) / n
        vals, vecs = np.linalg.eigh(gram)
        order = np.argsort(vals)[::-1]
        vals = vals[order]
        keep = _positive_rank(vals)
        keep = min(keep, max_rank)
        if keep == 0:
            raise ValueError("sample covariance has no positive eigenvalues")
        vals = vals[:keep]
        vecs = vecs[:, order[:keep]]
        # u_j = A^T v_j / sqrt(n lambda_j) is the unit eigenvector of A^T A / n
        basis_w = (weighted.T @ vecs) / np.sqrt(n * vals)
    else:
        kernel = (weighted.T @ weighted) / n
        vals, vecs = np.linalg.eigh(kernel)
        order = np.argsort(vals)[::-1]
        vals = vals[order]
        keep = _positive_rank(vals)
        keep = min(keep, max_rank)
        if keep == 0:
            raise ValueError("sample covariance has no positive eigenvalues")
        vals = vals[:keep]
        basis_w = vecs[:, order[:keep]]

    eigenfunctions = (basis_w / sqrt_w[:, None]).T  # m x G
    flip = np.sign(
        eigenfunctions[np.arange(keep), np.argmax(np.abs(eigenfunctions), axis=1)]
    )
    flip[flip == 0] = 1.0
    eigenfunctions = eigenfunctions * flip[:, None]
    scores = (sample.data * sample.grid.weights) @ eigenfunctions.T

    return FpcBasis(
        grid=sample.grid,
        eigenvalues=vals,
        eigenfunctions=eigenfunctions,
        scores=scores,
    )


def _positive_rank(sorted_vals):
    """Count leading eigenvalues above the relative floor."""
    top = sorted_vals[0]
    if top <= 0:
        return 0
    return int(np.count_nonzero(sorted_vals > RELATIVE_EIGENVALUE_FLOOR * top))


def reconstruct(basis: FpcBasis, rank: int) -> FunctionalSample:
    """Rebuild curves from their leading `rank` principal component scores."""
    if not 1 <= rank <= basis.m:
        raise ValueError(f"rank must lie in [1, {basis.m}], got {rank}")
    data = basis.scores[:, :rank] @ basis.eigenfunctions[:rank]
    return FunctionalSample(grid=basis.grid, data=data, centered=True)
