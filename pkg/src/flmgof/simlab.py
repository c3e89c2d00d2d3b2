"""Monte Carlo study harness: data scenarios, deviations, and rejection tables.

Nine scenarios pair a slope function with a covariate process; each carries a
three-level deviation schedule (delta = 0 is the null). Responses follow

    Y_i = <X_i, rho> + sign * delta * Dev(X_i) + eps_i,

with Gaussian noise scaled so the null signal-to-noise ratio is R^2 = 0.95:
sigma^2 = Var(<X, rho>) (1 - R^2) / R^2, the variance estimated once per
scenario by a fixed-seed 100000-draw Monte Carlo and cached.

Every trial is seeded by (study seed, scenario, deviation level, n, trial)
through a counter-based generator, so results do not depend on how trials are
scheduled across workers.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .funspace import FunctionalSample, Grid, _frozen, uniform_grid
from .processes import (
    brownian_bridge,
    brownian_motion,
    cosine_expansion,
    geometric_brownian_motion,
    ornstein_uhlenbeck,
)
from .rptest import test_flm

__all__ = [
    "ALPHAS",
    "ScenarioSpec",
    "MonteCarloResult",
    "gen_process",
    "deviation",
    "scenario",
    "gen_response",
    "run_study",
    "fdr_discretization_experiment",
]

ALPHAS = (0.01, 0.05, 0.10)
NULL_R_SQUARED = 0.95
SIGNAL_VARIANCE_DRAWS = 100_000
_SIGNAL_VARIANCE_SEED_TAG = 0x51E9A7
_PROCESS_KINDS = ("bm", "bb", "hhn1", "hhn2", "ou", "gbm")


def gen_process(kind: str, n: int, grid: Grid, rng) -> FunctionalSample:
    """Draw n covariate paths of the named process on the grid."""
    if n < 1:
        raise ValueError("n must be positive")
    if kind == "bm":
        data = brownian_motion(n, grid, rng)
    elif kind == "bb":
        data = brownian_bridge(n, grid, rng)
    elif kind == "hhn1":
        data = cosine_expansion(n, grid, rng, decay=2.0)
    elif kind == "hhn2":
        data = cosine_expansion(n, grid, rng, decay=4.0)
    elif kind == "ou":
        data = ornstein_uhlenbeck(n, grid, rng)
    elif kind == "gbm":
        data = geometric_brownian_motion(n, grid, rng)
    else:
        raise ValueError(f"unknown process kind {kind!r}; expected {_PROCESS_KINDS}")
    return FunctionalSample(grid=grid, data=data, centered=False)


def _deviation_rows(kind: int, data: np.ndarray, grid: Grid) -> np.ndarray:
    w = grid.weights
    if kind == 1:
        return np.sqrt(np.sum(data**2 * w, axis=1))
    if kind == 2:
        t = grid.points
        taper = w * t * (1.0 - t)
        kernel = np.sin(2.0 * np.pi * np.outer(t, t))
        u = data * taper
        return 25.0 * np.sum((u @ kernel) * u, axis=1)
    if kind == 3:
        return np.sum(w * np.exp(-data) * data**2, axis=1)
    raise ValueError(f"deviation kind must be 1, 2 or 3, got {kind}")


def deviation(kind: int, x, grid: Grid) -> float:
    """Evaluate one deviation functional at a single curve.

    kind 1: L2 norm ||X||.
    kind 2: 25 * double integral of sin(2 pi t s) s(1-s) t(1-t) X(s) X(t).
    kind 3: <exp(-X), X^2>.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (grid.size,):
        raise ValueError("curve length does not match the grid")
    return float(_deviation_rows(kind, x[None, :], grid)[0])


def _sin_basis_shifted(j, t):
    # eigenfunctions of the Brownian motion covariance
    return np.sqrt(2.0) * np.sin((j - 0.5) * np.pi * t)


def _sin_basis(j, t):
    # eigenfunctions of the Brownian bridge covariance
    return np.sqrt(2.0) * np.sin(j * np.pi * t)


def _cos_basis(j, t):
    return np.sqrt(2.0) * np.cos(j * np.pi * t)


def _slope_curve(index: int, t: np.ndarray) -> np.ndarray:
    if index == 1:
        return (
            2.0 * _sin_basis_shifted(1, t)
            + 4.0 * _sin_basis_shifted(2, t)
            + 5.0 * _sin_basis_shifted(3, t)
        ) / np.sqrt(2.0)
    if index == 2:
        return (
            2.0 * _sin_basis(1, t) + 4.0 * _sin_basis(2, t) + 5.0 * _sin_basis(3, t)
        ) / np.sqrt(2.0)
    if index == 3:
        return (
            2.0 * _sin_basis_shifted(2, t)
            + 4.0 * _sin_basis_shifted(3, t)
            + 5.0 * _sin_basis_shifted(7, t)
        ) / np.sqrt(2.0)
    if index in (4, 5):
        j = np.arange(1, 21)
        coeffs = 2.0**1.5 * (-1.0) ** j * j**-2.0
        return coeffs @ np.array([_cos_basis(k, t) for k in j])
    if index == 6:
        return np.log(15.0 * t**2 + 10.0) + np.cos(4.0 * np.pi * t)
    if index == 7:
        return np.sin(2.0 * np.pi * t) - np.cos(2.0 * np.pi * t)
    if index == 8:
        return t - (t - 0.75) ** 2
    if index == 9:
        return np.pi**2 * (t**2 - 1.0 / 3.0)
    raise ValueError(f"scenario index must be 1..9, got {index}")


# scenario index -> (process kind, deviation kind, deviation sign, deltas)
_SCENARIO_TABLE = {
    1: ("bm", 1, +1, (0.0, 0.25, 0.75)),
    2: ("bb", 2, -1, (0.0, 2.0, 7.5)),
    3: ("bm", 1, -1, (0.0, 0.2, 0.5)),
    4: ("hhn1", 2, -1, (0.0, 1.0, 3.0)),
    5: ("hhn2", 2, -1, (0.0, 1.0, 3.0)),
    6: ("bm", 1, +1, (0.0, 0.2, 1.0)),
    7: ("ou", 2, -1, (0.0, 0.25, 1.0)),
    8: ("ou", 3, -1, (0.0, 0.01, 0.1)),
    9: ("gbm", 3, +1, (0.0, 0.5, 2.5)),
}


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation scenario: slope, covariate law, deviation schedule."""

    id: str
    index: int
    grid: Grid
    rho: np.ndarray
    process: str
    deviation_kind: int
    deviation_sign: int
    deltas: tuple

    def __post_init__(self):
        object.__setattr__(self, "rho", _frozen(self.rho))

    @cached_property
    def signal_variance(self) -> float:
        """Monte Carlo Var(<X, rho>) under the null, fixed internal seed."""
        return _signal_variance(self.process, self.rho, self.grid, self.index)

    @cached_property
    def sigma2(self) -> float:
        """Noise variance giving R^2 = 0.95 under the null."""
        value = self.signal_variance * (1.0 - NULL_R_SQUARED) / NULL_R_SQUARED
        if not value > 0.0:
            raise ValueError("scenario noise variance must be positive")
        return value


def scenario(index: int, grid: Grid | None = None) -> ScenarioSpec:
    """Build scenario S1..S9 on the given grid (default: 201 equidistant points)."""
    if index not in _SCENARIO_TABLE:
        raise ValueError(f"scenario index must be 1..9, got {index}")
    if grid is None:
        grid = uniform_grid(201)
    process, dev_kind, sign, deltas = _SCENARIO_TABLE[index]
    rho = _slope_curve(index, grid.points)
    return ScenarioSpec(
        id=f"S{index}",
        index=index,
        grid=grid,
        rho=rho,
        process=process,
        deviation_kind=dev_kind,
        deviation_sign=sign,
        deltas=deltas,
    )


_signal_variance_cache: dict = {}


def _signal_variance(process, rho, grid, index):
    key = (index, grid.size)
    cached = _signal_variance_cache.get(key)
    if cached is not None:
        return cached
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence((_SIGNAL_VARIANCE_SEED_TAG, index)))
    )
    weighted_rho = grid.weights * rho
    chunk = 10_000
    values = np.empty(SIGNAL_VARIANCE_DRAWS)
    for start in range(0, SIGNAL_VARIANCE_DRAWS, chunk):
        block = gen_process(process, chunk, grid, rng)
        values[start : start + chunk] = block.data @ weighted_rho
    estimate = float(np.var(values, ddof=1))
    _signal_variance_cache[key] = estimate
    return estimate


def gen_response(spec: ScenarioSpec, X: FunctionalSample, d: int, rng, sigma2=None):
    """Draw responses at deviation level d (0 = null) for the given paths."""
    if d not in (0, 1, 2):
        raise ValueError("deviation level d must be 0, 1 or 2")
    if not X.grid.matches(spec.grid):
        raise ValueError("sample grid does not match the scenario grid")
    noise_var = spec.sigma2 if sigma2 is None else float(sigma2)
    signal = X.data @ (spec.grid.weights * spec.rho)
    delta = spec.deltas[d]
    if delta != 0.0:
        signal = signal + spec.deviation_sign * delta * _deviation_rows(
            spec.deviation_kind, X.data, spec.grid
        )
    if noise_var > 0.0:
        signal = signal + rng.normal(0.0, np.sqrt(noise_var), X.n)
    return signal


@dataclass(frozen=True)
class MonteCarloResult:
    """Rejection rates and rank diagnostics for one (scenario, d, n) cell."""

    scenario: str
    d: int
    n: int
    K: int
    B: int
    kind: str
    M: int
    rejection_rates: tuple
    mean_rank: float
    sd_rank: float
    wall_time_s: float


def _study_trial(args):
    (index, d, n, K, B, kind, r, sampler, seed, trial) = args
    spec = scenario(index)
    root = np.random.SeedSequence((seed, index, d, n, trial))
    data_seed, test_seed = root.spawn(2)
    rng = np.random.Generator(np.random.Philox(data_seed))
    X = gen_process(spec.process, n, spec.grid, rng)
    y = gen_response(spec, X, d, rng)
    report = test_flm(
        X, y, K=K, B=B, kind=kind, r=r, rank=None, sampler=sampler, seed=test_seed
    )
    return report.p_fdr, report.settings["rank"]


def run_study(
    scenarios,
    d_values,
    n_values,
    M: int,
    K: int = 5,
    B: int = 500,
    kind: str = "cvm",
    seed: int = 0,
    threads: int = 1,
    r: float = 0.95,
    sampler: str = "i",
):
    """Run the rejection-rate study over a grid of cells.

    Returns one MonteCarloResult per (scenario, d, n) combination, in that
    nesting order. Identical output for any `threads` value: each trial owns
    a seed derived from (seed, scenario, d, n, trial) and aggregation follows
    trial order.
    """
    if M < 1:
        raise ValueError("M must be a positive integer")
    if threads < 1:
        raise ValueError("threads must be a positive integer")
    results = []
    for index in scenarios:
        spec = scenario(index)
        spec.sigma2  # warm the per-scenario cache before any forking
        for d in d_values:
            for n in n_values:
                started = time.perf_counter()
                payloads = [
                    (index, d, n, K, B, kind, r, sampler, seed, trial)
                    for trial in range(M)
                ]
                if threads == 1:
                    outcomes = [_study_trial(p) for p in payloads]
                else:
                    chunk = max(1, M // (threads * 4))
                    with ProcessPoolExecutor(max_workers=threads) as pool:
                        outcomes = list(
                            pool.map(_study_trial, payloads, chunksize=chunk)
                        )
                pvalues = np.array([p for p, _ in outcomes])
                ranks = np.array([rank for _, rank in outcomes], dtype=float)
                rates = tuple(
                    float(np.mean(pvalues < alpha)) for alpha in ALPHAS
                )
                results.append(
                    MonteCarloResult(
                        scenario=spec.id,
                        d=d,
                        n=n,
                        K=K,
                        B=B,
                        kind=kind,
                        M=M,
                        rejection_rates=rates,
                        mean_rank=float(ranks.mean()),
                        sd_rank=float(ranks.std(ddof=1)) if M > 1 else 0.0,
                        wall_time_s=time.perf_counter() - started,
                    )
                )
    return results


def fdr_discretization_experiment(
    k_values, b_values, M: int, alphas=ALPHAS, seed: int = 0
):
    """Rejection rates of the FDR combination fed i.i.d. discrete-uniform p-values.

    Each single-projection p-value is uniform on {0, 1/B, ..., 1}, the exact
    null law of the uncorrected bootstrap p-value. For every (K, B) pair the
    experiment reports the rejection rate at each alpha, the same rate for
    the positive-corrected variant (count + 1) / (B + 1), and the frequency
    of combined p-values equal to zero (the discreteness floor,
    1 - (B / (B + 1))^K in expectation).
    """
    if M < 1:
        raise ValueError("M must be a positive integer")
    rows = []
    for K in k_values:
        for B in b_values:
            rng = np.random.Generator(
                np.random.Philox(np.random.SeedSequence((seed, K, B)))
            )
            counts = rng.integers(0, B + 1, size=(M, K))
            plain = _fdr_rows(counts / B)
            corrected = _fdr_rows((counts + 1.0) / (B + 1.0))
            for alpha in alphas:
                rows.append(
                    {
                        "K": K,
                        "B": B,
                        "M": M,
                        "alpha": alpha,
                        "rate": float(np.mean(plain < alpha)),
                        "rate_positive_correction": float(np.mean(corrected < alpha)),
                        "zero_rate": float(np.mean(plain == 0.0)),
                    }
                )
    return rows


def _fdr_rows(pvalue_matrix):
    """Row-wise FDR combination of a (M, K) p-value matrix."""
    k = pvalue_matrix.shape[1]
    ordered = np.sort(pvalue_matrix, axis=1)
    factors = k / np.arange(1.0, k + 1.0)
    return np.minimum((ordered * factors).min(axis=1), 1.0)
