"""Bat-algorithm metaheuristic and the intensity-threshold objective.

The optimizer is the canonical echolocation scheme: each bat carries a
position, velocity, loudness A and pulse rate r.  Per iteration and bat

    f = f_min + (f_max - f_min) * U(0,1)
    v <- v + (x - x_best) * f
    candidate = clamp(x + v)
    with probability (1 - r): candidate = clamp(x_best + eps * A_mean),
                              eps ~ U(-1,1) per dimension
    accept candidate iff U(0,1) < A and its fitness beats the bat's own;
    on acceptance  A <- alpha * A,  r <- r0 * (1 - exp(-gamma * t))

Maximization convention throughout.  The global best tracks every
evaluated candidate, accepted or not, so the best-so-far history is
non-decreasing by construction.

Determinism contract: the master seed is split into one PCG64 stream per
bat via ``numpy.random.SeedSequence.spawn``; bat i draws, in order, its
initial position, then per iteration beta, the local-walk coin, the walk
offsets (only when the walk is taken) and the acceptance coin.  x_best
and the mean loudness are snapshotted at the start of each iteration and
the acceptance pass runs in bat order, so results are independent of how
the fitness evaluations themselves are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .histeq import histogram
from .image import as_gray

__all__ = [
    "BatParams",
    "BatState",
    "bat_optimize",
    "between_class_variance",
    "otsu_threshold",
    "otsu_fitness",
    "optimize_threshold",
    "write_convergence_csv",
]

FitnessFn = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class BatParams:
    """Knobs of the bat algorithm plus the search box and master seed."""

    population: int = 20
    iterations: int = 500
    f_min: float = 0.0
    f_max: float = 2.0
    alpha: float = 0.9
    gamma: float = 0.9
    a0: float = 1.0
    r0: float = 0.5
    lower: tuple[float, ...] = (0.0,)
    upper: tuple[float, ...] = (255.0,)
    seed: int = 0

    @property
    def dims(self) -> int:
        return len(self.lower)

    def __post_init__(self) -> None:
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.f_min > self.f_max:
            raise ValueError("f_min must not exceed f_max")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.a0 <= 0.0:
            raise ValueError("initial loudness must be positive")
        if not 0.0 <= self.r0 <= 1.0:
            raise ValueError("initial pulse rate must lie in [0, 1]")
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper bounds must have equal length")
        if not all(lo < hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("lower bound must be strictly below upper, per dimension")


@dataclass
class BatState:
    """Final population state and the per-iteration best-fitness history."""

    positions: np.ndarray
    velocities: np.ndarray
    loudness: np.ndarray
    pulse_rate: np.ndarray
    best_position: np.ndarray
    best_fitness: float
    history: list[float] = field(default_factory=list)


def bat_optimize(params: BatParams, fitness: FitnessFn) -> BatState:
    """Run the bat algorithm for exactly ``params.iterations`` iterations.

    ``fitness`` must be a pure function of its input vector, total on the
    search box; higher values are better.  Positions are clamped to the
    box after every move.
    """
    n = params.population
    dims = params.dims
    lower = np.array(params.lower, dtype=np.float64)
    upper = np.array(params.upper, dtype=np.float64)
    streams = np.random.SeedSequence(params.seed).spawn(n)
    gens = [np.random.Generator(np.random.PCG64(s)) for s in streams]

    positions = np.empty((n, dims))
    for i, gen in enumerate(gens):
        positions[i] = lower + (upper - lower) * gen.uniform(size=dims)
    velocities = np.zeros((n, dims))
    loudness = np.full(n, params.a0)
    pulse_rate = np.full(n, params.r0)

    fitnesses = np.array([float(fitness(positions[i])) for i in range(n)])
    best_idx = int(np.argmax(fitnesses))
    best_position = positions[best_idx].copy()
    best_fitness = float(fitnesses[best_idx])

    history: list[float] = []
    for t in range(1, params.iterations + 1):
        ref_best = best_position.copy()
        mean_loudness = float(loudness.mean())

        candidates = np.empty((n, dims))
        accept_coins = np.empty(n)
        for i, gen in enumerate(gens):
            beta = gen.uniform()
            freq = params.f_min + (params.f_max - params.f_min) * beta
            velocities[i] += (positions[i] - ref_best) * freq
            cand = positions[i] + velocities[i]
            if gen.uniform() > pulse_rate[i]:
                cand = ref_best + gen.uniform(-1.0, 1.0, size=dims) * mean_loudness
            candidates[i] = np.clip(cand, lower, upper)
            accept_coins[i] = gen.uniform()

        cand_fitness = np.array([float(fitness(candidates[i])) for i in range(n)])

        for i in range(n):
            if accept_coins[i] < loudness[i] and cand_fitness[i] > fitnesses[i]:
                positions[i] = candidates[i]
                fitnesses[i] = cand_fitness[i]
                loudness[i] *= params.alpha
                pulse_rate[i] = params.r0 * (1.0 - math.exp(-params.gamma * t))
            if cand_fitness[i] > best_fitness:
                best_fitness = float(cand_fitness[i])
                best_position = candidates[i].copy()
        history.append(best_fitness)

    return BatState(
        positions=positions,
        velocities=velocities,
        loudness=loudness,
        pulse_rate=pulse_rate,
        best_position=best_position,
        best_fitness=best_fitness,
        history=history,
    )


# ---------------------------------------------------------------------------
# Threshold objective
# ---------------------------------------------------------------------------

def between_class_variance(hist: np.ndarray) -> np.ndarray:
    """Between-class variance of every integer threshold t in 0..255.

    Thresholding splits intensities into the classes {v <= t} and
    {v > t}; the score is w0 * w1 * (mu0 - mu1)^2, defined as 0 whenever
    either class is empty.
    """
    counts = np.asarray(hist, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("histogram is empty")
    p = counts / total
    w0 = np.cumsum(p)
    m0 = np.cumsum(p * np.arange(256))
    mu_total = m0[-1]
    w1 = 1.0 - w0
    valid = (w0 > 0) & (w1 > 0)
    sigma = np.zeros(256)
    num = (mu_total * w0 - m0) ** 2
    sigma[valid] = num[valid] / (w0[valid] * w1[valid])
    return sigma


def otsu_threshold(hist: np.ndarray) -> int:
    """Lowest threshold maximizing the between-class variance."""
    return int(np.argmax(between_class_variance(hist)))


def otsu_fitness(image: np.ndarray) -> FitnessFn:
    """Fitness mapping a 1-D position x to sigma_B^2(floor(x)) of ``image``."""
    table = between_class_variance(histogram(image))

    def fitness(x: np.ndarray) -> float:
        t = int(np.clip(math.floor(float(np.asarray(x).ravel()[0])), 0, 255))
        return float(table[t])

    return fitness


def optimize_threshold(image: np.ndarray, params: BatParams) -> tuple[int, BatState]:
    """Search the best global intensity threshold of ``image``.

    Runs the bat algorithm over [0, 255] with the between-class-variance
    objective and returns floor(best position) clamped to [0, 255]
    together with the final state (whose history is the convergence
    curve).
    """
    if params.dims != 1:
        raise ValueError(f"threshold search is 1-D, got dims={params.dims}")
    if params.lower != (0.0,) or params.upper != (255.0,):
        raise ValueError("threshold search bounds must be [0, 255]")
    img = as_gray(image)
    state = bat_optimize(params, otsu_fitness(img))
    threshold = int(np.clip(math.floor(float(state.best_position[0])), 0, 255))
    return threshold, state


def write_convergence_csv(state: BatState, path) -> None:
    """Write the best-so-far history as CSV, one row per iteration."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration,best_fitness\n")
        for t, value in enumerate(state.history, start=1):
            fh.write(f"{t},{value:.6g}\n")
