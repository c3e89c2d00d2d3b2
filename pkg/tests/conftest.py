"""Shared helpers for the test suite."""

import numpy as np

from flmgof import center, gen_process, uniform_grid


def brute_process_norms(projections, marks):
    """Double-loop reference for the projected-process norms.

    Evaluates T(x) = n^(-1/2) sum_i 1{p_i <= x} m_i literally at every
    observed projection value with a double loop.
    """
    projections = np.asarray(projections, dtype=float)
    marks = np.asarray(marks, dtype=float)
    n = projections.size
    scale = 1.0 / np.sqrt(n)
    t_at = np.array(
        [scale * marks[projections <= x].sum() for x in projections]
    )
    return float(np.max(np.abs(t_at))), float(np.mean(t_at**2))


def centered_bm_sample(n, num_points=201, seed=0):
    """Centered Brownian motion sample for fixture-style reuse."""
    grid = uniform_grid(num_points)
    rng = np.random.Generator(np.random.Philox(seed))
    sample = gen_process("bm", n, grid, rng)
    return center(sample)[0]
