"""Input signals, sparse test systems, and time-varying scenarios.

A scenario is a piecewise-constant true system: an ordered list of segments,
each holding its own weight vector and active-tap set. Observations are
produced by sliding an L-sample window over the input stream (zero-padded
before t=0) and adding white Gaussian observation noise.

Trial streams are driven by the counter-based Philox generator so that
Monte-Carlo trials get independent, reproducible streams from
``seed XOR trial_index`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
import scipy.signal

__all__ = [
    "SignalModel",
    "Segment",
    "SystemScenario",
    "SegmentDef",
    "ScenarioDef",
    "Observation",
    "make_rng",
    "gen_input",
    "make_system",
    "trial_signals",
    "scenario_stream",
]


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for the stream ``seed XOR stream``."""
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream index must be non-negative")
    return np.random.Generator(np.random.Philox(key=seed ^ stream))


@dataclass(frozen=True)
class SignalModel:
    """Stationary input process: white Gaussian or AR(1).

    ``variance`` is the variance of the process itself; for AR(1) the
    driving noise is scaled by sqrt(1 - pole^2) so the output keeps that
    variance in steady state.
    """

    kind: str = "white"
    variance: float = 1.0
    pole: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("white", "ar1"):
            raise ValueError(f"unknown input kind {self.kind!r}")
        if not self.variance > 0:
            raise ValueError("input variance must be positive")
        if self.kind == "ar1":
            if self.pole is None or not (-1.0 < self.pole < 1.0):
                raise ValueError("ar1 pole must lie in (-1, 1)")


def gen_input(model: SignalModel, n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Generate ``n`` samples of the input process.

    White: i.i.d. N(0, variance). AR(1): stationary start
    x(0) ~ N(0, variance), then x(t) = pole*x(t-1) + sqrt(1-pole^2)*sigma*g(t).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if rng is None:
        rng = make_rng(model.seed)
    sigma = np.sqrt(model.variance)
    g = rng.standard_normal(n)
    if model.kind == "white":
        return sigma * g
    a = model.pole
    x = np.empty(n)
    x[0] = sigma * g[0]
    if n > 1:
        drive = np.sqrt(1.0 - a * a) * sigma * g[1:]
        # one-pole recursion; lfilter keeps this O(n) without a Python loop
        x[1:], _ = scipy.signal.lfilter([1.0], [1.0, -a], drive, zi=np.array([a * x[0]]))
    return x


def make_system(
    L: int,
    K: int,
    magnitude_rule: str = "random",
    rng: int | np.random.Generator = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw a length-L system with exactly K nonzero taps.

    Positions are uniform without replacement; nonzero values are N(0,1)
    (``random``) or random signs (``unit``). Returns ``(w_opt, active)``
    where ``active`` holds the sorted nonzero indices.
    """
    if not 0 <= K <= L:
        raise ValueError(f"active tap count {K} outside [0, {L}]")
    if magnitude_rule not in ("random", "unit"):
        raise ValueError(f"unknown magnitude rule {magnitude_rule!r}")
    if not isinstance(rng, np.random.Generator):
        rng = make_rng(int(rng))
    active = np.sort(rng.choice(L, size=K, replace=False))
    w = np.zeros(L)
    if K:
        if magnitude_rule == "random":
            vals = rng.standard_normal(K)
            # avoid the measure-zero exact zero that would break the support count
            vals[vals == 0.0] = 1.0
        else:
            vals = rng.integers(0, 2, size=K) * 2.0 - 1.0
        w[active] = vals
    return w, active


@dataclass(frozen=True)
class Segment:
    """One piece of a piecewise-constant system."""

    duration: int
    w_opt: np.ndarray
    active: np.ndarray

    def __post_init__(self):
        if self.duration < 1:
            raise ValueError("segment duration must be >= 1")
        nz = np.flatnonzero(self.w_opt)
        if nz.size != self.active.size or not np.array_equal(np.sort(self.active), nz):
            raise ValueError("active set does not match the support of w_opt")


@dataclass(frozen=True)
class SystemScenario:
    """Piecewise-constant true system plus the observation-noise level."""

    L: int
    segments: tuple[Segment, ...]
    noise_variance: float

    def __post_init__(self):
        if not self.segments:
            raise ValueError("scenario needs at least one segment")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be >= 0")
        for seg in self.segments:
            if seg.w_opt.shape != (self.L,):
                raise ValueError("segment weight vector length differs from L")

    @property
    def n_samples(self) -> int:
        return sum(seg.duration for seg in self.segments)

    @property
    def boundaries(self) -> np.ndarray:
        """Cumulative segment start offsets, length ``len(segments)+1``."""
        return np.concatenate([[0], np.cumsum([s.duration for s in self.segments])])

    def w_opt_at(self, i: int) -> np.ndarray:
        b = self.boundaries
        k = int(np.searchsorted(b, i, side="right") - 1)
        return self.segments[k].w_opt


@dataclass(frozen=True)
class SegmentDef:
    duration: int
    K: int
    magnitude_rule: str = "random"


@dataclass(frozen=True)
class ScenarioDef:
    """JSON-facing scenario description; systems are drawn on materialize().

    Segment systems are drawn deterministically from ``seed``: segment j
    uses the stream ``seed XOR (j+1)``, so a definition always materializes
    to the same scenario.
    """

    L: int
    segments: tuple[SegmentDef, ...]
    noise_variance: float
    input: SignalModel
    seed: int = 0

    def materialize(self) -> SystemScenario:
        segs = []
        for j, sd in enumerate(self.segments):
            w, active = make_system(self.L, sd.K, sd.magnitude_rule, make_rng(self.seed, j + 1))
            segs.append(Segment(sd.duration, w, active))
        return SystemScenario(self.L, tuple(segs), self.noise_variance)


@dataclass(frozen=True)
class Observation:
    """Regressor, noisy desired response, and the noise sample itself."""

    u: np.ndarray
    d: float
    epsilon: float


def trial_signals(
    scenario: SystemScenario,
    model: SignalModel,
    rng: np.random.Generator,
    input_samples: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw one trial's raw input and noise arrays.

    Draw order is fixed (input first, then noise) so that any consumer of
    the same generator sees identical streams. ``input_samples`` overrides
    the input process (debugging hook); the noise is still drawn.
    """
    n = scenario.n_samples
    if input_samples is not None:
        x = np.asarray(input_samples, dtype=float)
        if x.shape != (n,):
            raise ValueError(f"input override must have shape ({n},)")
    else:
        x = gen_input(model, n, rng)
    noise = rng.standard_normal(n) * np.sqrt(scenario.noise_variance)
    return x, noise


def scenario_stream(
    scenario: SystemScenario,
    model: SignalModel,
    rng: Optional[np.random.Generator] = None,
    input_samples: Optional[np.ndarray] = None,
) -> Iterator[Observation]:
    """Yield the observation sequence for one trial.

    The regressor at time i is the window ``[x(i), x(i-1), ..., x(i-L+1)]``
    with zeros before t=0; the desired response uses the segment-active
    system at i plus independent observation noise.
    """
    if rng is None:
        rng = make_rng(model.seed)
    x, noise = trial_signals(scenario, model, rng, input_samples)
    L = scenario.L
    padded = np.concatenate([np.zeros(L - 1), x])
    bounds = scenario.boundaries
    seg = 0
    for i in range(scenario.n_samples):
        while i >= bounds[seg + 1]:
            seg += 1
        u = padded[i : i + L][::-1].copy()
        eps = noise[i]
        d = float(u @ scenario.segments[seg].w_opt + eps)
        yield Observation(u=u, d=d, epsilon=float(eps))
