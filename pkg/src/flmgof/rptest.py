"""Goodness-of-fit tests for the functional linear model via random projections.

The residual-marked empirical process indexed by a direction h is

    T(x) = n^(-1/2) sum_i 1{<X_i, h> <= x} m_i,

a step function with jumps at the observed projections (ties jump jointly).
Its Kolmogorov-Smirnov norm is sup_x |T(x)| and its Cramer-von Mises norm is
the integral of T^2 against the empirical law of the projections, i.e.
(1/n) sum_i T(<X_i, h>)^2. Both reduce to one sort and a cumulative sum.

Null calibration is a wild bootstrap: residuals are multiplied by i.i.d.
two-point golden-ratio weights with mean 0 and second and third moments 1,
and the fitting pipeline is replayed on the perturbed response at the same
rank. Because the pipeline centers the response before regressing on the
score columns, the replay collapses to re-centering the perturbed residuals
and applying (I - H); both constraints the observed residuals satisfy (zero
sum and score orthogonality) are thereby imposed on every replicate. One
projection gives a p-value p_hat = (1/B) #{ ||T*_b|| >= ||T|| }; K
projections are combined by the false-discovery-rate envelope
min_k (K/k) p_(k), clamped to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flm import FlmFit, _hat_apply_rows, estimate_rho, select_rank_sicc
from .fpc import FpcBasis, compute_fpc
from .funspace import FunctionalSample, _frozen, center, curve_norm
from .processes import ornstein_uhlenbeck

__all__ = [
    "Direction",
    "ProjectedStat",
    "ProjectionOutcome",
    "TestReport",
    "DegenerateProjectionError",
    "golden_multipliers",
    "sample_direction_datadriven",
    "project",
    "process_statistic",
    "wild_bootstrap_pvalue",
    "fdr_combine",
    "test_flm",
    "test_simple",
]

# Two-point wild bootstrap law built on the golden ratio: values
# (1 -+ sqrt5)/2 with probabilities (5 +- sqrt5)/10 give moments
# E V = 0, E V^2 = 1, E V^3 = 1.
_SQRT5 = np.sqrt(5.0)
GOLDEN_VALUES = ((1.0 - _SQRT5) / 2.0, (1.0 + _SQRT5) / 2.0)
GOLDEN_PROBS = ((5.0 + _SQRT5) / 10.0, (5.0 - _SQRT5) / 10.0)

# A direction is degenerate when every projection is this small relative to
# the Cauchy-Schwarz scale max_i ||X_i|| * ||h||.
DEGENERATE_RELATIVE_TOL = 1e-10
MAX_DIRECTION_ATTEMPTS = 100

STAT_KINDS = ("ks", "cvm")
SAMPLER_VARIANTS = ("i", "ii", "iii")


class DegenerateProjectionError(RuntimeError):
    """Raised when repeated direction draws project the sample to zero."""


@dataclass(frozen=True)
class Direction:
    """A projection direction on the sample grid."""

    values: np.ndarray
    sampler: str
    draw: int

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))


@dataclass(frozen=True)
class ProjectedStat:
    """Process norms for one direction plus the projection layout."""

    ks: float
    cvm: float
    projections: np.ndarray
    order: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "projections", _frozen(self.projections))
        order = np.asarray(self.order, dtype=np.intp)
        order.setflags(write=False)
        object.__setattr__(self, "order", order)

    def value(self, kind: str) -> float:
        return self.ks if _check_kind(kind) == "ks" else self.cvm


@dataclass(frozen=True)
class ProjectionOutcome:
    index: int
    statistic: float
    pvalue: float


@dataclass(frozen=True)
class TestReport:
    per_projection: tuple
    p_fdr: float
    settings: dict

    def to_dict(self) -> dict:
        return {
            "p_fdr": self.p_fdr,
            "per_projection": [
                {"index": rec.index, "statistic": rec.statistic, "p": rec.pvalue}
                for rec in self.per_projection
            ],
            "settings": dict(self.settings),
        }


def _check_kind(kind: str) -> str:
    normalized = str(kind).lower()
    if normalized not in STAT_KINDS:
        raise ValueError(f"statistic kind must be one of {STAT_KINDS}, got {kind!r}")
    return normalized


def golden_multipliers(rng, size) -> np.ndarray:
    """Draw wild bootstrap weights from the golden-ratio two-point law."""
    low, high = GOLDEN_VALUES
    return np.where(rng.random(size) < GOLDEN_PROBS[0], low, high)


class _SortedProjections:
    """Sorted layout of one projection vector, reusable across mark vectors.

    Ties share a jump: the process value attached to every observation in a
    tie block is the cumulative sum at the end of the block.
    """

    __slots__ = ("n", "order", "block_end", "scale")

    def __init__(self, projections):
        projections = np.asarray(projections, dtype=float)
        if projections.ndim != 1 or projections.size == 0:
            raise ValueError("projections must be a non-empty vector")
        if not np.all(np.isfinite(projections)):
            raise ValueError("projections contain non-finite values")
        self.n = projections.size
        self.order = np.argsort(projections, kind="stable")
        ordered = projections[self.order]
        self.block_end = np.searchsorted(ordered, ordered, side="right") - 1
        self.scale = 1.0 / np.sqrt(self.n)

    def norms(self, marks):
        """KS and CvM norms for marks given in original observation order.

        `marks` may be (n,) or (B, n); norms come back with matching shape.
        """
        ordered = np.asarray(marks, dtype=float)[..., self.order]
        levels = np.cumsum(ordered, axis=-1)[..., self.block_end] * self.scale
        ks = np.max(np.abs(levels), axis=-1)
        cvm = np.mean(levels * levels, axis=-1)
        return ks, cvm


def process_statistic(projections, marks) -> ProjectedStat:
    """Evaluate both process norms for one direction.

    Parameters
    ----------
    projections : array, shape (n,)
        Scalar projections <X_i, h>.
    marks : array, shape (n,)
        Marks attached to the observations (residuals, or Y - m0(X)).
    """
    layout = _SortedProjections(projections)
    marks = np.asarray(marks, dtype=float)
    if marks.shape != (layout.n,):
        raise ValueError("marks must match projections in length")
    if not np.all(np.isfinite(marks)):
        raise ValueError("marks contain non-finite values")
    ks, cvm = layout.norms(marks)
    return ProjectedStat(
        ks=float(ks),
        cvm=float(cvm),
        projections=np.asarray(projections, dtype=float),
        order=layout.order,
    )


def fdr_combine(pvalues) -> float:
    """Combine K p-values into min_k (K/k) p_(k), clamped to [0, 1]."""
    p = np.asarray(pvalues, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("pvalues must be a non-empty vector")
    if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
        raise ValueError("pvalues must lie in [0, 1]")
    k = p.size
    ordered = np.sort(p)
    combined = float(np.min(ordered * (k / np.arange(1.0, k + 1.0))))
    return min(combined, 1.0)


def project(sample: FunctionalSample, direction: Direction) -> np.ndarray:
    """Inner products <X_i, h> for every curve in the sample."""
    if direction.values.size != sample.grid.size:
        raise ValueError("direction length does not match the sample grid")
    return (sample.data * sample.grid.weights) @ direction.values


def sample_direction_datadriven(
    basis: FpcBasis, r: float = 0.95, rng=None, variant: str = "i", draw: int = 0
) -> Direction:
    """Draw one random direction for projecting the sample.

    Variants
    --------
    "i"   Gaussian coefficients on the leading eigenfunctions, one standard
          deviation per component taken from the observed score spread.
    "ii"  Same expansion with unit-variance coefficients.
    "iii" An Ornstein-Uhlenbeck path (mean reversion 1/2, volatility 1)
          drawn independently of the data.

    For variants i and ii the number of components j_n is the smallest k with
    sum_{j<=k} lambda_j^2 / sum_{j<=m} lambda_j^2 >= r.
    """
    if variant not in SAMPLER_VARIANTS:
        raise ValueError(f"sampler variant must be one of {SAMPLER_VARIANTS}")
    if rng is None:
        raise ValueError("an np.random.Generator is required")
    if variant == "iii":
        values = ornstein_uhlenbeck(1, basis.grid, rng, mean_reversion=0.5)[0]
        return Direction(values=values, sampler=variant, draw=draw)

    if not 0.0 < r <= 1.0:
        raise ValueError("variance threshold r must lie in (0, 1]")
    squared = basis.eigenvalues**2
    cumulative = np.cumsum(squared)
    ratios = cumulative / cumulative[-1]
    j_n = int(np.argmax(ratios >= r)) + 1
    if variant == "i":
        spread = np.std(basis.scores[:, :j_n], axis=0, ddof=1)
    else:
        spread = np.ones(j_n)
    coefficients = rng.normal(0.0, 1.0, j_n) * spread
    values = coefficients @ basis.eigenfunctions[:j_n]
    return Direction(values=values, sampler=variant, draw=draw)


def _draw_nondegenerate_direction(sample, basis, r, variant, rng, draw):
    """Resample until the projections carry signal, up to a fixed budget."""
    curve_scale = np.sqrt(
        np.max(np.sum(sample.data**2 * sample.grid.weights, axis=1))
    )
    for _ in range(MAX_DIRECTION_ATTEMPTS):
        direction = sample_direction_datadriven(
            basis, r=r, rng=rng, variant=variant, draw=draw
        )
        projections = project(sample, direction)
        scale = curve_scale * curve_norm(direction.values, sample.grid)
        if np.max(np.abs(projections)) > DEGENERATE_RELATIVE_TOL * scale:
            return direction, projections
    raise DegenerateProjectionError(
        f"projection draw {draw} degenerate after {MAX_DIRECTION_ATTEMPTS} attempts"
    )


def _bootstrap_pvalue(layout, observed_value, mark_rows, kind, positive_correction):
    ks, cvm = layout.norms(mark_rows)
    stats = ks if kind == "ks" else cvm
    count = int(np.count_nonzero(stats >= observed_value))
    if positive_correction:
        return (count + 1.0) / (stats.size + 1.0)
    return count / stats.size


def wild_bootstrap_pvalue(
    fit: FlmFit,
    projections,
    observed: ProjectedStat,
    B: int,
    kind: str = "cvm",
    rng=None,
    positive_correction: bool = False,
) -> float:
    """Bootstrap p-value for one direction with refits at the fitted rank.

    Each replicate multiplies the residuals by fresh golden-ratio weights and
    re-residualizes through the fitting pipeline (center, then project out
    the score columns); the p-value is the fraction of replicate norms at or
    above the observed one (ties count as exceedances).
    """
    kind = _check_kind(kind)
    if B < 1:
        raise ValueError("B must be a positive integer")
    if rng is None:
        raise ValueError("an np.random.Generator is required")
    layout = _SortedProjections(projections)
    if layout.n != fit.n:
        raise ValueError("projections must match the fit in length")
    weights = golden_multipliers(rng, (B, fit.n))
    replicate_marks = _replay_residuals(fit, weights * fit.residuals)
    return _bootstrap_pvalue(
        layout, observed.value(kind), replicate_marks, kind, positive_correction
    )


def _replay_residuals(fit, perturbed):
    """Residuals of the centered refit at fixed rank on fitted + perturbed.

    The bootstrap response Y* = fitted + e goes through the same pipeline as
    the data: subtract the sample mean (the fitted values already have mean
    zero), then regress on the score columns, so the replicate residuals are
    (I - H)(e - mean(e)).
    """
    centered = perturbed - perturbed.mean(axis=-1, keepdims=True)
    return centered - _hat_apply_rows(fit, centered)


def _as_seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _philox(seed_seq):
    return np.random.Generator(np.random.Philox(seed_seq))


def _projection_round(
    sample,
    basis,
    marks,
    replicate_source,
    K,
    r,
    sampler,
    kind,
    direction_rng,
    positive_correction,
):
    """Statistics and bootstrap p-values across K directions.

    `replicate_source` is either a fixed (B, n) mark matrix shared by every
    projection or a zero-argument callable producing a fresh one per draw.
    """
    outcomes = []
    for draw in range(1, K + 1):
        _, projections = _draw_nondegenerate_direction(
            sample, basis, r, sampler, direction_rng, draw
        )
        layout = _SortedProjections(projections)
        ks, cvm = layout.norms(marks)
        observed_value = float(ks if kind == "ks" else cvm)
        replicate_marks = (
            replicate_source() if callable(replicate_source) else replicate_source
        )
        pvalue = _bootstrap_pvalue(
            layout, observed_value, replicate_marks, kind, positive_correction
        )
        outcomes.append(
            ProjectionOutcome(index=draw, statistic=observed_value, pvalue=pvalue)
        )
    return outcomes


def _validate_common(sample, y, K, B):
    if not isinstance(sample, FunctionalSample):
        raise ValueError("X must be a FunctionalSample")
    if sample.n < 3:
        raise ValueError("the test needs at least three observations")
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size != sample.n:
        raise ValueError("response must be a vector with one value per curve")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite values")
    if K < 1:
        raise ValueError("K must be a positive integer")
    if B < 1:
        raise ValueError("B must be a positive integer")
    return y


def test_flm(
    X: FunctionalSample,
    y,
    K: int = 5,
    B: int = 1000,
    kind: str = "cvm",
    r: float = 0.95,
    rank: int | None = None,
    sampler: str = "i",
    seed=None,
    positive_correction: bool = False,
    share_multipliers: bool = True,
) -> TestReport:
    """Composite goodness-of-fit test of the functional linear model.

    Fits the model once (rank chosen by SICc unless `rank` is given), then
    scores K random projections of the residual-marked process, calibrating
    each with a wild bootstrap of B replicates. One multiplier matrix is
    shared by all projections within a replicate unless `share_multipliers`
    is disabled. Reproducible for a fixed `seed` (int or SeedSequence)
    regardless of available parallelism.
    """
    kind = _check_kind(kind)
    y = _validate_common(X, y, K, B)

    sample = X if X.centered else center(X)[0]
    y_centered = y - y.mean()
    basis = compute_fpc(sample)
    if rank is None:
        max_rank = min(basis.m, sample.n - 3)
        if max_rank < 1:
            raise ValueError("too few observations to select a rank; pass rank=")
        fitted_rank, _ = select_rank_sicc(sample, y_centered, basis, max_rank)
    else:
        fitted_rank = int(rank)
    fit = estimate_rho(sample, y_centered, basis, fitted_rank)

    root = _as_seed_sequence(seed)
    direction_seed, multiplier_seed = root.spawn(2)
    direction_rng = _philox(direction_seed)
    multiplier_rng = _philox(multiplier_seed)

    def fresh_replicates():
        weights = golden_multipliers(multiplier_rng, (B, sample.n))
        return _replay_residuals(fit, weights * fit.residuals)

    replicate_source = fresh_replicates() if share_multipliers else fresh_replicates
    outcomes = _projection_round(
        sample,
        basis,
        fit.residuals,
        replicate_source,
        K,
        r,
        sampler,
        kind,
        direction_rng,
        positive_correction,
    )

    p_fdr = fdr_combine([rec.pvalue for rec in outcomes])
    settings = {
        "K": K,
        "B": B,
        "stat": kind,
        "rank": fitted_rank,
        "r": r,
        "sampler": sampler,
        "seed": _seed_for_report(seed),
        "positive_correction": positive_correction,
    }
    return TestReport(per_projection=tuple(outcomes), p_fdr=p_fdr, settings=settings)


def test_simple(
    X: FunctionalSample,
    y,
    m0=None,
    K: int = 5,
    B: int = 1000,
    kind: str = "cvm",
    r: float = 0.95,
    sampler: str = "i",
    seed=None,
    positive_correction: bool = False,
) -> TestReport:
    """Test a fully specified regression function m0 against the data.

    Marks are Y_i - m0(X_i); with `m0=None` the null regression is zero and
    the marks are the raw responses (no-effect hypothesis). Nothing is
    estimated under this null, so the bootstrap multiplies the marks
    directly, with no refit and no centering.
    """
    kind = _check_kind(kind)
    y = _validate_common(X, y, K, B)

    if m0 is None:
        marks = y.copy()
    elif callable(m0):
        marks = y - np.asarray(m0(X), dtype=float)
    else:
        predictions = np.asarray(m0, dtype=float)
        if predictions.shape != y.shape:
            raise ValueError("m0 predictions must match the response in length")
        marks = y - predictions
    if not np.all(np.isfinite(marks)):
        raise ValueError("marks contain non-finite values")

    sample = X if X.centered else center(X)[0]
    basis = compute_fpc(sample)

    root = _as_seed_sequence(seed)
    direction_seed, multiplier_seed = root.spawn(2)
    direction_rng = _philox(direction_seed)
    multiplier_rng = _philox(multiplier_seed)

    weights = golden_multipliers(multiplier_rng, (B, sample.n))
    replicate_marks = weights * marks
    outcomes = _projection_round(
        sample,
        basis,
        marks,
        replicate_marks,
        K,
        r,
        sampler,
        kind,
        direction_rng,
        positive_correction,
    )

    p_fdr = fdr_combine([rec.pvalue for rec in outcomes])
    settings = {
        "K": K,
        "B": B,
        "stat": kind,
        "rank": None,
        "r": r,
        "sampler": sampler,
        "seed": _seed_for_report(seed),
        "positive_correction": positive_correction,
    }
    return TestReport(per_projection=tuple(outcomes), p_fdr=p_fdr, settings=settings)


def _seed_for_report(seed):
    if seed is None or isinstance(seed, (int, np.integer)):
        return None if seed is None else int(seed)
    return None
