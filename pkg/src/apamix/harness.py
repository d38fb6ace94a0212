"""Monte-Carlo experiment runner, EMSE estimation, presets, and persistence.

Trials are independent: trial t draws its input/noise streams from the
counter-based stream ``seed XOR t`` and nothing else, so results do not
depend on how trials are scheduled. For speed the engine simulates trials
in fixed-size chunks, vectorizing the per-sample algebra across the chunk;
chunk boundaries (and therefore all floating-point reduction orders) are a
function of ``chunk_size`` alone, never of the worker count.

:func:`run_trial` is the scalar reference path built directly on the step
functions in :mod:`apamix.filters`; the vectorized engine is tested
against it.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import repeat
from typing import Optional, Sequence

import numpy as np

from . import theory
from .combination import CombinationState, combine, update_a
from .errors import ConfigError, DivergenceError, NumericalError
from .filters import (
    FilterConfig,
    FilterState,
    ProportionateConfig,
    RegressorBuffer,
    apa_step,
    push,
    za_apa_step,
    za_papa_step,
)
from .signals import (
    ScenarioDef,
    SegmentDef,
    SignalModel,
    make_rng,
    scenario_stream,
    trial_signals,
)

__all__ = [
    "MixingConfig",
    "ExperimentConfig",
    "TrialRecord",
    "SegmentStats",
    "LearningCurves",
    "SteadyState",
    "run_trial",
    "run_experiment",
    "steady_state_stats",
    "preset_paper_scenario",
    "sweep_rho",
    "read_config",
    "write_config",
    "config_to_dict",
    "config_from_dict",
    "write_curves",
    "write_sweep",
    "to_db",
]


@dataclass(frozen=True)
class MixingConfig:
    mu_a: float = 100.0
    a_plus: float = 4.0
    a0: float = 0.0

    def initial_state(self) -> CombinationState:
        return CombinationState(a=self.a0, a_plus=self.a_plus, mu_a=self.mu_a)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one Monte-Carlo experiment needs.

    ``filter1`` is the plain affine-projection branch (its attractor must
    be off); ``filter2`` is the zero-attracting branch, proportionate when
    its config says so.
    """

    scenario: ScenarioDef
    filter1: FilterConfig
    filter2: FilterConfig
    mixing: MixingConfig
    runs: int
    seed: int
    steady_window_fraction: float = 0.1
    chunk_size: int = 100

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not 0 < self.steady_window_fraction <= 1:
            raise ValueError("steady_window_fraction must lie in (0, 1]")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.filter1.rho != 0 or self.filter1.proportionate is not None:
            raise ValueError("filter1 is the plain projection branch: rho=0, no gains")
        for name, fc in (("filter1", self.filter1), ("filter2", self.filter2)):
            if fc.L != self.scenario.L:
                raise ValueError(f"{name}.L={fc.L} does not match scenario L={self.scenario.L}")


@dataclass(frozen=True)
class TrialRecord:
    """Per-iteration records of one trial (a-priori errors and mixing)."""

    ea1: np.ndarray
    ea2: np.ndarray
    ea: np.ndarray
    lam: np.ndarray


@dataclass(frozen=True)
class SegmentStats:
    """Steady-window per-tap weight statistics for one scenario segment."""

    start: int
    end: int
    K: int
    active: np.ndarray  # bool mask (L,)
    mean_dev1: np.ndarray
    mean_dev2: np.ndarray
    mean_dev2_se: np.ndarray  # standard error of mean_dev2 across trials
    msd1: np.ndarray
    msd2: np.ndarray
    cross12: np.ndarray
    window_samples: int


@dataclass(frozen=True)
class LearningCurves:
    """Ensemble-averaged learning curves and per-segment weight statistics."""

    j1: np.ndarray
    j2: np.ndarray
    j12: np.ndarray
    j: np.ndarray
    lam: np.ndarray
    j12_se: np.ndarray
    segments: tuple[SegmentStats, ...]
    runs_used: int
    skipped: tuple[int, ...] = ()

    @property
    def n_samples(self) -> int:
        return self.j1.shape[0]


@dataclass(frozen=True)
class SteadyState:
    """Window-averaged steady-state levels of one segment."""

    J1: float
    J2: float
    J12: float
    J: float
    lam: float


# ---------------------------------------------------------------------------
# reference (scalar) trial
# ---------------------------------------------------------------------------


def run_trial(
    config: ExperimentConfig,
    trial_index: int,
    initial_weights: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> TrialRecord:
    """Run one trial sample-by-sample through the reference step functions.

    The trial's streams come from ``config.seed XOR trial_index`` only.
    Slow (per-sample Python), intended for tests and debugging; use
    :func:`run_experiment` for ensembles. ``initial_weights`` overrides the
    zero initialization of both branches (testing hook).
    """
    scenario = config.scenario.materialize()
    rng = make_rng(config.seed, trial_index)
    n = scenario.n_samples
    if initial_weights is None:
        state1 = FilterState.zeros(config.filter1)
        state2 = FilterState.zeros(config.filter2)
    else:
        state1 = FilterState(w=np.array(initial_weights[0], dtype=float), config=config.filter1)
        state2 = FilterState(w=np.array(initial_weights[1], dtype=float), config=config.filter2)
    mix = config.mixing.initial_state()
    buf1 = RegressorBuffer.zeros(scenario.L, config.filter1.M)
    buf2 = RegressorBuffer.zeros(scenario.L, config.filter2.M)
    step2 = za_papa_step if config.filter2.proportionate is not None else za_apa_step

    ea1 = np.empty(n)
    ea2 = np.empty(n)
    ea = np.empty(n)
    lam = np.empty(n)
    for i, obs in enumerate(scenario_stream(scenario, config.scenario.input, rng)):
        w_opt = scenario.w_opt_at(i)
        buf1 = push(buf1, obs)
        buf2 = buf1 if config.filter1.M == config.filter2.M else push(buf2, obs)
        y1 = float(obs.u @ state1.w)
        y2 = float(obs.u @ state2.w)
        d_clean = float(obs.u @ w_opt)
        ea1[i] = d_clean - y1
        ea2[i] = d_clean - y2
        lam[i] = mix.lam
        ea[i] = mix.lam * ea1[i] + (1.0 - mix.lam) * ea2[i]
        out = combine(mix.lam, y1, y2, obs.d)
        mix = update_a(mix, out.e, y1, y2)
        try:
            state1 = apa_step(state1, buf1)
            state2 = step2(state2, buf2)
        except DivergenceError as exc:
            raise DivergenceError(str(exc), trial_index=trial_index, sample_index=i) from exc
    return TrialRecord(ea1=ea1, ea2=ea2, ea=ea, lam=lam)


# ---------------------------------------------------------------------------
# vectorized chunk engine
# ---------------------------------------------------------------------------


def _gains_batch(w: np.ndarray, rho_p: float, delta: float) -> np.ndarray:
    mags = np.abs(w)
    gamma_min = np.maximum(delta, mags.max(axis=1))
    gamma = np.maximum(rho_p * gamma_min[:, None], mags)
    return gamma / gamma.mean(axis=1, keepdims=True)


class _ChunkResult:
    """Raw sums from one chunk, reduced later in fixed chunk order."""

    def __init__(self, n, L, n_segments):
        self.count = 0
        self.sum_e1sq = np.zeros(n)
        self.sum_e2sq = np.zeros(n)
        self.sum_prod = np.zeros(n)
        self.sum_prodsq = np.zeros(n)
        self.sum_esq = np.zeros(n)
        self.sum_lam = np.zeros(n)
        self.seg_wsum1 = [np.zeros(L) for _ in range(n_segments)]
        self.seg_wsum2 = [np.zeros(L) for _ in range(n_segments)]
        self.seg_wsq1 = [np.zeros(L) for _ in range(n_segments)]
        self.seg_wsq2 = [np.zeros(L) for _ in range(n_segments)]
        self.seg_cross = [np.zeros(L) for _ in range(n_segments)]
        # sum over trials of the squared per-trial window mean of dev2
        self.seg_meansq2 = [np.zeros(L) for _ in range(n_segments)]
        self.diverged: list[tuple[int, int]] = []  # (trial_index, sample_index)


def _simulate_chunk(
    config: ExperimentConfig,
    trial_indices: Sequence[int],
    skip_diverged: bool,
) -> _ChunkResult:
    scenario = config.scenario.materialize()
    model = config.scenario.input
    n = scenario.n_samples
    L = scenario.L
    M1, M2 = config.filter1.M, config.filter2.M
    R = len(trial_indices)
    f1, f2 = config.filter1, config.filter2
    prop = f2.proportionate
    mixing = config.mixing

    X = np.empty((R, n))
    NOISE = np.empty((R, n))
    for r, t in enumerate(trial_indices):
        X[r], NOISE[r] = trial_signals(scenario, model, make_rng(config.seed, t))

    bounds = scenario.boundaries
    seg_wopt = [seg.w_opt for seg in scenario.segments]
    # steady-state windows where per-tap weight stats are accumulated
    win_start = []
    for k, seg in enumerate(scenario.segments):
        w = max(10, int(math.ceil(config.steady_window_fraction * seg.duration)))
        win_start.append(max(bounds[k], bounds[k + 1] - w))

    u = np.zeros((R, L))
    U1 = np.zeros((R, L, M1))
    D1 = np.zeros((R, M1))
    U2 = U1 if M1 == M2 else np.zeros((R, L, M2))
    D2 = D1 if M1 == M2 else np.zeros((R, M2))
    shared_window = M1 == M2
    ptr1 = ptr2 = 0
    w1 = np.zeros((R, L))
    w2 = np.zeros((R, L))
    a = np.full(R, mixing.a0)
    I1 = f1.eps * np.eye(M1)
    I2 = f2.eps * np.eye(M2)

    e1sq = np.empty((R, n))
    e2sq = np.empty((R, n))
    prod = np.empty((R, n))
    esq = np.empty((R, n))
    lam_rec = np.empty((R, n))
    res = _ChunkResult(n, L, len(scenario.segments))
    wstats = [
        [np.zeros((R, L)) for _ in range(5)] for _ in scenario.segments
    ]  # per segment: sums of dev1, dev2, dev1^2, dev2^2, dev1*dev2

    alive = np.ones(R, dtype=bool)
    seg = 0
    for i in range(n):
        while i >= bounds[seg + 1]:
            seg += 1
        wopt = seg_wopt[seg]

        if L > 1:
            u[:, 1:] = u[:, :-1].copy()
        u[:, 0] = X[:, i]
        d_clean = u @ wopt
        d = d_clean + NOISE[:, i]
        U1[:, :, ptr1] = u
        D1[:, ptr1] = d
        ptr1 = (ptr1 + 1) % M1
        if not shared_window:
            U2[:, :, ptr2] = u
            D2[:, ptr2] = d
            ptr2 = (ptr2 + 1) % M2

        y1 = np.einsum("rl,rl->r", u, w1)
        y2 = np.einsum("rl,rl->r", u, w2)
        ea1 = d_clean - y1
        ea2 = d_clean - y2
        lam = 1.0 / (1.0 + np.exp(-a))
        ea = lam * ea1 + (1.0 - lam) * ea2
        e1sq[:, i] = ea1 * ea1
        e2sq[:, i] = ea2 * ea2
        prod[:, i] = ea1 * ea2
        esq[:, i] = ea * ea
        lam_rec[:, i] = lam

        if i >= win_start[seg]:
            dev1 = wopt[None, :] - w1
            dev2 = wopt[None, :] - w2
            s = wstats[seg]
            s[0] += dev1
            s[1] += dev2
            s[2] += dev1 * dev1
            s[3] += dev2 * dev2
            s[4] += dev1 * dev2

        # mixing update from the combined output error
        e_comb = d - (lam * y1 + (1.0 - lam) * y2)
        a = np.clip(
            a + mixing.mu_a * e_comb * (y1 - y2) * lam * (1.0 - lam),
            -mixing.a_plus,
            mixing.a_plus,
        )

        try:
            # filter 1: plain projection
            e_vec1 = D1 - np.einsum("rlm,rl->rm", U1, w1)
            G1 = np.einsum("rlm,rln->rmn", U1, U1) + I1
            s1 = np.linalg.solve(G1, e_vec1[..., None])[..., 0]
            w1 = w1 + f1.mu * np.einsum("rlm,rm->rl", U1, s1)

            # filter 2: zero-attracting (optionally proportionate) projection
            e_vec2 = D2 - np.einsum("rlm,rl->rm", U2, w2)
            if prop is None:
                G2 = np.einsum("rlm,rln->rmn", U2, U2) + I2
                s2 = np.linalg.solve(G2, e_vec2[..., None])[..., 0]
                w2 = w2 + f2.mu * np.einsum("rlm,rm->rl", U2, s2) - f2.rho * np.sign(w2)
            else:
                g = _gains_batch(w2, prop.rho_p, prop.delta)
                GU = g[:, :, None] * U2
                G2 = np.einsum("rlm,rln->rmn", U2, GU) + I2
                s2 = np.linalg.solve(G2, e_vec2[..., None])[..., 0]
                w2 = w2 + f2.mu * np.einsum("rlm,rm->rl", GU, s2) - f2.rho * np.sign(w2)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"projection solve failed at sample {i}: {exc}") from exc

        bad = ~(np.isfinite(w1).all(axis=1) & np.isfinite(w2).all(axis=1))
        if bad.any():
            newly = np.flatnonzero(bad & alive)
            for r in newly:
                t = trial_indices[int(r)]
                if not skip_diverged:
                    raise DivergenceError(
                        f"trial {t} diverged at sample {i}",
                        trial_index=t,
                        sample_index=i,
                    )
                res.diverged.append((t, i))
            alive &= ~bad
            if not alive.any():
                break
            # freeze dead rows so their numbers stay finite but unused
            w1[bad] = 0.0
            w2[bad] = 0.0
            a[bad] = 0.0

    res.count = int(alive.sum())
    res.sum_e1sq = e1sq[alive].sum(axis=0)
    res.sum_e2sq = e2sq[alive].sum(axis=0)
    res.sum_prod = prod[alive].sum(axis=0)
    res.sum_prodsq = (prod[alive] ** 2).sum(axis=0)
    res.sum_esq = esq[alive].sum(axis=0)
    res.sum_lam = lam_rec[alive].sum(axis=0)
    for k in range(len(scenario.segments)):
        s = wstats[k]
        res.seg_wsum1[k] = s[0][alive].sum(axis=0)
        res.seg_wsum2[k] = s[1][alive].sum(axis=0)
        res.seg_wsq1[k] = s[2][alive].sum(axis=0)
        res.seg_wsq2[k] = s[3][alive].sum(axis=0)
        res.seg_cross[k] = s[4][alive].sum(axis=0)
        window_len = int(bounds[k + 1]) - win_start[k]
        per_trial_mean = s[1][alive] / window_len
        res.seg_meansq2[k] = (per_trial_mean**2).sum(axis=0)
    return res


def run_experiment(
    config: ExperimentConfig,
    workers: int = 1,
    skip_diverged: bool = False,
) -> LearningCurves:
    """Ensemble-average the configured number of trials.

    Results are bit-identical for any ``workers`` value: trials are cut
    into fixed chunks of ``config.chunk_size`` and partial sums are reduced
    in chunk order.
    """
    scenario = config.scenario.materialize()
    n = scenario.n_samples
    chunks = [
        list(range(lo, min(lo + config.chunk_size, config.runs)))
        for lo in range(0, config.runs, config.chunk_size)
    ]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(_simulate_chunk, repeat(config), chunks, repeat(skip_diverged))
            )
    else:
        results = [_simulate_chunk(config, c, skip_diverged) for c in chunks]

    used = sum(r.count for r in results)
    skipped = tuple(t for r in results for (t, _) in r.diverged)
    if used == 0:
        raise DivergenceError("all trials diverged")

    def total(attr):
        out = getattr(results[0], attr).copy()
        for r in results[1:]:
            out += getattr(r, attr)
        return out

    j1 = total("sum_e1sq") / used
    j2 = total("sum_e2sq") / used
    j12 = total("sum_prod") / used
    j = total("sum_esq") / used
    lam = total("sum_lam") / used
    var_prod = np.maximum(total("sum_prodsq") / used - j12**2, 0.0)
    j12_se = np.sqrt(var_prod / used)

    bounds = scenario.boundaries
    seg_stats = []
    for k, seg in enumerate(scenario.segments):
        w = max(10, int(math.ceil(config.steady_window_fraction * seg.duration)))
        start_w = int(max(bounds[k], bounds[k + 1] - w))
        samples = int(bounds[k + 1] - start_w) * used

        def seg_total(attr):
            out = getattr(results[0], attr)[k].copy()
            for r in results[1:]:
                out += getattr(r, attr)[k]
            return out

        active = np.zeros(scenario.L, dtype=bool)
        active[seg.active] = True
        mean_dev2 = seg_total("seg_wsum2") / samples
        var_across = np.maximum(seg_total("seg_meansq2") / used - mean_dev2**2, 0.0)
        seg_stats.append(
            SegmentStats(
                start=int(bounds[k]),
                end=int(bounds[k + 1]),
                K=int(seg.active.size),
                active=active,
                mean_dev1=seg_total("seg_wsum1") / samples,
                mean_dev2=mean_dev2,
                mean_dev2_se=np.sqrt(var_across / used),
                msd1=seg_total("seg_wsq1") / samples,
                msd2=seg_total("seg_wsq2") / samples,
                cross12=seg_total("seg_cross") / samples,
                window_samples=samples,
            )
        )

    return LearningCurves(
        j1=j1,
        j2=j2,
        j12=j12,
        j=j,
        lam=lam,
        j12_se=j12_se,
        segments=tuple(seg_stats),
        runs_used=used,
        skipped=skipped,
    )


def steady_state_stats(
    curves: LearningCurves, segment: int, window_fraction: float = 0.1
) -> SteadyState:
    """Time-average the curves over the final fraction of one segment."""
    seg = curves.segments[segment]
    length = seg.end - seg.start
    w = int(math.ceil(window_fraction * length))
    if w < 10:
        raise ValueError(f"steady-state window of {w} samples is too short (< 10)")
    sl = slice(seg.end - w, seg.end)
    return SteadyState(
        J1=float(curves.j1[sl].mean()),
        J2=float(curves.j2[sl].mean()),
        J12=float(curves.j12[sl].mean()),
        J=float(curves.j[sl].mean()),
        lam=float(curves.lam[sl].mean()),
    )


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

_FULL_RHO = {"white": 8e-6, "ar1": 3e-5}


def default_eps(M: int, input_variance: float = 1.0) -> float:
    """Default diagonal loading, small against the Gram diagonal ~ L*variance."""
    return 1e-4 * M * input_variance


def _desk_rho_scale(mu: float) -> float:
    """Ratio of the admissible attractor ranges of the desk and full sparse systems."""
    desk = theory.rho_bound_global(
        theory.TheoryInputs(L=64, K=4, M=4, mu=mu, rho=0.0, noise_variance=1e-3)
    )
    full = theory.rho_bound_global(
        theory.TheoryInputs(L=256, K=16, M=8, mu=mu, rho=0.0, noise_variance=1e-3)
    )
    if desk is None or full is None:
        raise ValueError(f"admissible-range bound undefined at mu={mu}")
    return desk / full


def preset_paper_scenario(
    scale: str = "desk",
    input_kind: str = "white",
    filter2_kind: str = "zaapa",
    mu: float = 0.5,
    runs: Optional[int] = None,
    seed: int = 1,
) -> ExperimentConfig:
    """Benchmark scenarios: a non-sparse, semi-sparse, then highly-sparse
    system identified over three consecutive segments.

    ``full`` is the heavyweight protocol (256 taps, 6000-sample segments,
    1000 runs); ``desk`` is a reduced version for quick runs and CI
    (64 taps, 4000-sample segments, 200 runs) whose attractor strength is
    rescaled by the ratio of the two scales' admissible-range bounds.
    """
    if scale not in ("full", "desk"):
        raise ValueError(f"unknown scale {scale!r}")
    if input_kind not in ("white", "ar1"):
        raise ValueError(f"unknown input kind {input_kind!r}")
    if filter2_kind not in ("zaapa", "zapapa"):
        raise ValueError(f"unknown filter2 kind {filter2_kind!r}")

    pole = 0.8 if input_kind == "ar1" else None
    model = SignalModel(kind=input_kind, variance=1.0, pole=pole, seed=seed)
    if scale == "full":
        L, M = 256, 8
        segments = (SegmentDef(6000, 256), SegmentDef(6000, 80), SegmentDef(6000, 16))
        rho = _FULL_RHO[input_kind]
        n_runs = 1000 if runs is None else runs
    else:
        L, M = 64, 4
        segments = (SegmentDef(4000, 64), SegmentDef(4000, 20), SegmentDef(4000, 4))
        rho = _FULL_RHO[input_kind] * _desk_rho_scale(mu)
        n_runs = 200 if runs is None else runs

    eps = default_eps(M)
    prop = ProportionateConfig() if filter2_kind == "zapapa" else None
    return ExperimentConfig(
        scenario=ScenarioDef(
            L=L, segments=segments, noise_variance=1e-3, input=model, seed=seed
        ),
        filter1=FilterConfig(L=L, M=M, mu=mu, rho=0.0, eps=eps),
        filter2=FilterConfig(L=L, M=M, mu=mu, rho=rho, eps=eps, proportionate=prop),
        mixing=MixingConfig(),
        runs=n_runs,
        seed=seed,
    )


def sweep_rho(
    config: ExperimentConfig,
    rho_values: Sequence[float],
    workers: int = 1,
    skip_diverged: bool = False,
    window_fraction: Optional[float] = None,
) -> list[tuple[float, SteadyState]]:
    """Steady-state statistics of the final segment across attractor strengths."""
    wf = config.steady_window_fraction if window_fraction is None else window_fraction
    out = []
    for rho in rho_values:
        cfg = replace(config, filter2=replace(config.filter2, rho=float(rho)))
        curves = run_experiment(cfg, workers=workers, skip_diverged=skip_diverged)
        out.append((float(rho), steady_state_stats(curves, len(curves.segments) - 1, wf)))
    return out


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def to_db(x: float) -> float:
    """10*log10(|x|); the sign of cross terms is dropped in dB output."""
    mag = abs(x)
    return -math.inf if mag == 0 else 10.0 * math.log10(mag)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing field {key!r} in {where}")
    return d[key]


def config_from_dict(doc: dict) -> ExperimentConfig:
    try:
        sc = _require(doc, "scenario", "config")
        inp = _require(sc, "input", "scenario")
        model = SignalModel(
            kind=_require(inp, "kind", "scenario.input"),
            variance=float(inp.get("variance", 1.0)),
            pole=(None if inp.get("pole") is None else float(inp["pole"])),
            seed=int(sc.get("seed", 0)),
        )
        segments = tuple(
            SegmentDef(
                duration=int(_require(s, "duration", f"scenario.segments[{i}]")),
                K=int(_require(s, "K", f"scenario.segments[{i}]")),
                magnitude_rule=s.get("magnitude_rule", "random"),
            )
            for i, s in enumerate(_require(sc, "segments", "scenario"))
        )
        scenario = ScenarioDef(
            L=int(_require(sc, "L", "scenario")),
            segments=segments,
            noise_variance=float(_require(sc, "noise_variance", "scenario")),
            input=model,
            seed=int(sc.get("seed", 0)),
        )

        def filt(d: dict, where: str) -> FilterConfig:
            prop = d.get("proportionate")
            return FilterConfig(
                L=scenario.L,
                M=int(_require(d, "M", where)),
                mu=float(_require(d, "mu", where)),
                rho=float(d.get("rho", 0.0)),
                eps=float(d.get("eps", 0.0)),
                proportionate=(
                    None
                    if prop is None
                    else ProportionateConfig(
                        rho_p=float(prop.get("rho_p", 0.05)),
                        delta=float(prop.get("delta", 0.01)),
                    )
                ),
            )

        mixing_doc = doc.get("mixing", {})
        return ExperimentConfig(
            scenario=scenario,
            filter1=filt(_require(doc, "filter1", "config"), "filter1"),
            filter2=filt(_require(doc, "filter2", "config"), "filter2"),
            mixing=MixingConfig(
                mu_a=float(mixing_doc.get("mu_a", 100.0)),
                a_plus=float(mixing_doc.get("a_plus", 4.0)),
                a0=float(mixing_doc.get("a0", 0.0)),
            ),
            runs=int(_require(doc, "runs", "config")),
            seed=int(doc.get("seed", 0)),
            steady_window_fraction=float(doc.get("steady_window_fraction", 0.1)),
            chunk_size=int(doc.get("chunk_size", 100)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc}") from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    def filt(fc: FilterConfig) -> dict:
        d = {"M": fc.M, "mu": fc.mu, "rho": fc.rho, "eps": fc.eps, "proportionate": None}
        if fc.proportionate is not None:
            d["proportionate"] = {
                "rho_p": fc.proportionate.rho_p,
                "delta": fc.proportionate.delta,
            }
        return d

    sc = config.scenario
    return {
        "scenario": {
            "L": sc.L,
            "segments": [
                {"duration": s.duration, "K": s.K, "magnitude_rule": s.magnitude_rule}
                for s in sc.segments
            ],
            "noise_variance": sc.noise_variance,
            "input": {"kind": sc.input.kind, "variance": sc.input.variance, "pole": sc.input.pole},
            "seed": sc.seed,
        },
        "filter1": filt(config.filter1),
        "filter2": filt(config.filter2),
        "mixing": {
            "mu_a": config.mixing.mu_a,
            "a_plus": config.mixing.a_plus,
            "a0": config.mixing.a0,
        },
        "runs": config.runs,
        "seed": config.seed,
        "steady_window_fraction": config.steady_window_fraction,
        "chunk_size": config.chunk_size,
    }


def read_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return config_from_dict(doc)


def write_config(config: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(config), fh, indent=2)
        fh.write("\n")


def write_curves(curves: LearningCurves, path, db: bool = False) -> None:
    """CSV dump with header iter,j1,j2,j12,j,lambda (lambda always linear)."""
    conv = to_db if db else (lambda x: x)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["iter", "j1", "j2", "j12", "j", "lambda"])
        for i in range(curves.n_samples):
            wr.writerow(
                [
                    i,
                    conv(curves.j1[i]),
                    conv(curves.j2[i]),
                    conv(curves.j12[i]),
                    conv(curves.j[i]),
                    curves.lam[i],
                ]
            )


def write_sweep(points: list[tuple[float, SteadyState]], path, db: bool = False) -> None:
    conv = to_db if db else (lambda x: x)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["rho", "j1", "j2", "j12", "j", "lambda"])
        for rho, st in points:
            wr.writerow([rho, conv(st.J1), conv(st.J2), conv(st.J12), conv(st.J), st.lam])
