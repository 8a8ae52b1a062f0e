"""Seeded Monte Carlo simulation of subjective tests under BinoVotes.

Randomness is derived per repetition from ``(seed, repetition, purpose)``
through :class:`numpy.random.SeedSequence`, so a repetition's draws do not
depend on which other repetitions ran, in what order, or on how many worker
threads were used.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import binovotes_bounds
from .errors import MosBoundsError
from .estimate import FileRecord, MosDataset
from .quality import QualityDistribution, Uniform, parse_distribution
from .scale import MOS_SCALE, MosLattice, RatingScale

# substream purposes
_QUALITY, _VOTES, _BIAS = 0, 1, 2

CONVERGENCE_NF_GRID = (2, 5, 10, 20, 50, 100, 200)
CONVERGENCE_NV = (1, 4, 16, 24)


class DegenerateCorrelationWarning(UserWarning):
    """Sample PCC undefined because MOS or quality has zero spread."""


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


@dataclass(frozen=True)
class SimConfig:
    scale: RatingScale = MOS_SCALE
    quality_dist: QualityDistribution = field(default_factory=Uniform)
    n_f: int = 1000
    n_v: int = 4
    n_reps: int = 1
    bias_spread: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_f < 2:
            raise MosBoundsError("n_f must be at least 2")
        if int(self.n_v) != self.n_v or self.n_v < 1:
            raise MosBoundsError("n_v must be a positive integer")
        if self.n_reps < 1:
            raise MosBoundsError("n_reps must be at least 1")
        if self.bias_spread < 0:
            raise MosBoundsError("bias_spread must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise MosBoundsError("seed must fit in 64 unsigned bits")
        d = self.quality_dist
        if d.lo < self.scale.s_L or d.hi > self.scale.s_H:
            raise MosBoundsError("quality distribution must lie inside the scale")


def _draw_test(cfg: SimConfig, rep: int):
    """True qualities, vote level indices ``(n_f, n_v)`` and MOS for one repetition."""
    scale = cfg.scale
    y = cfg.quality_dist.sample(substream(cfg.seed, rep, _QUALITY), cfg.n_f)
    vote_rng = substream(cfg.seed, rep, _VOTES)
    if cfg.bias_spread > 0:
        # one panel of n_v subjects rates every file; each has a fixed offset
        delta = substream(cfg.seed, rep, _BIAS).normal(0.0, cfg.bias_spread, cfg.n_v)
        q = np.clip(y[:, None] + delta[None, :], scale.s_L, scale.s_H)
        k = vote_rng.binomial(scale.n_s - 1, scale.to_unit(q))
    else:
        p = np.clip(scale.to_unit(y), 0.0, 1.0)
        k = vote_rng.binomial(scale.n_s - 1, p[:, None], size=(cfg.n_f, cfg.n_v))
    mos = MosLattice(scale, cfg.n_v).points[k.sum(axis=1)]
    return y, k, mos


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return math.nan
    xc, yc = x - x.mean(), y - y.mean()
    den = math.sqrt(float(xc @ xc) * float(yc @ yc))
    return float(xc @ yc) / den if den > 0 else math.nan


@dataclass(frozen=True)
class SimOutcome:
    config: SimConfig
    realized_mse: np.ndarray
    realized_sample_pcc: np.ndarray
    realized_mos_variance: np.ndarray
    realized_quality_variance: np.ndarray
    diagnostics: tuple[str, ...] = ()

    @staticmethod
    def _mean_se(a: np.ndarray) -> tuple[float, float]:
        a = a[~np.isnan(a)]
        if a.size == 0:
            return math.nan, math.nan
        se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else math.nan
        return float(a.mean()), se

    def summary(self) -> dict:
        out = {}
        for key in ("realized_mse", "realized_sample_pcc", "realized_mos_variance",
                    "realized_quality_variance"):
            m, se = self._mean_se(getattr(self, key))
            out[key] = {"mean": m, "se": se}
        return out

    def rows(self) -> list[dict]:
        return [
            {
                "rep": i,
                "mse": float(self.realized_mse[i]),
                "sample_pcc": float(self.realized_sample_pcc[i]),
                "mos_variance": float(self.realized_mos_variance[i]),
                "quality_variance": float(self.realized_quality_variance[i]),
            }
            for i in range(self.config.n_reps)
        ]


def _run_rep(cfg: SimConfig, rep: int):
    y, _, mos = _draw_test(cfg, rep)
    err = mos - y
    return (float(np.mean(err * err)), _pearson(mos, y),
            float(mos.var(ddof=1)), float(y.var(ddof=1)))


def run_simulation(cfg: SimConfig, workers: int = 1) -> SimOutcome:
    """Simulate ``cfg.n_reps`` tests and measure MOS-vs-truth agreement.

    Each repetition draws ``n_f`` true qualities, ``n_v`` votes per file,
    forms the MOS and records the realised MSE and sample PCC against the
    true qualities. Results are identical for every ``workers`` value.
    """
    reps = range(cfg.n_reps)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: _run_rep(cfg, r), reps))
    else:
        results = [_run_rep(cfg, r) for r in reps]
    arr = np.array(results, dtype=float).reshape(cfg.n_reps, 4)
    diagnostics = ()
    n_bad = int(np.isnan(arr[:, 1]).sum())
    if n_bad:
        msg = f"sample PCC undefined in {n_bad} of {cfg.n_reps} repetition(s): zero MOS or quality spread"
        warnings.warn(msg, DegenerateCorrelationWarning, stacklevel=2)
        diagnostics = (msg,)
    return SimOutcome(cfg, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], diagnostics)


def synth_dataset(cfg: SimConfig, rep: int = 0) -> tuple[MosDataset, np.ndarray]:
    """Synthetic test with raw votes, plus the hidden true qualities."""
    y, k, _ = _draw_test(cfg, rep)
    levels = cfg.scale.levels
    files = [FileRecord.from_votes(f"f{i}", levels[row]) for i, row in enumerate(k)]
    name = f"synthetic-seed{cfg.seed}-rep{rep}"
    return MosDataset(cfg.scale, tuple(files), name), y


@dataclass(frozen=True)
class ConvergenceRow:
    n_v: int
    n_f: int
    mean_sample_pcc: float
    se: float
    population_pcc: float
    n_valid: int

    @property
    def gap(self) -> float:
        return abs(self.mean_sample_pcc - self.population_pcc)


def _batched_pearson(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xc = x - x.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    den = np.sqrt((xc * xc).sum(axis=1) * (yc * yc).sum(axis=1))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (xc * yc).sum(axis=1) / den
    r[(np.ptp(x, axis=1) == 0) | (np.ptp(y, axis=1) == 0)] = np.nan
    return r


def convergence_experiment(scale: RatingScale = MOS_SCALE,
                           quality_dist: QualityDistribution | None = None,
                           n_v: int = 1, n_f_grid=CONVERGENCE_NF_GRID, n_reps: int = 10_000,
                           seed: int = 0) -> list[ConvergenceRow]:
    """Mean sample PCC between MOS and truth versus test size ``n_f``.

    Repetitions where the sample PCC is undefined (all MOS equal, possible
    for tiny tests) are left out of the mean; ``n_valid`` counts the rest.
    """
    dist = quality_dist if quality_dist is not None else Uniform(scale.s_L, scale.s_H)
    population = binovotes_bounds(scale, dist.mean(), dist.variance(), n_v).pcc_bound
    n_m = n_v * (scale.n_s - 1)
    points = MosLattice(scale, n_v).points
    rows = []
    for n_f in n_f_grid:
        rng = substream(seed, n_v, n_f)
        y = dist.sample(rng, n_reps * n_f).reshape(n_reps, n_f)
        # sum of n_v Binomial(n_s - 1, p) votes is Binomial(n_m, p)
        k = rng.binomial(n_m, np.clip(scale.to_unit(y), 0.0, 1.0))
        r = _batched_pearson(points[k], y)
        valid = r[~np.isnan(r)]
        se = float(valid.std(ddof=1) / math.sqrt(valid.size)) if valid.size > 1 else math.nan
        rows.append(ConvergenceRow(n_v, int(n_f), float(valid.mean()), se, population, int(valid.size)))
    return rows


_CONFIG_KEYS = {"s_l", "s_h", "n_s", "dist", "n_f", "n_v", "reps", "bias", "seed"}


def load_config(path) -> SimConfig:
    """Read ``key = value`` lines (``#`` comments) into a :class:`SimConfig`.

    Keys: ``s_l s_h n_s dist n_f n_v reps bias seed``.
    """
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MosBoundsError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in _CONFIG_KEYS:
            raise MosBoundsError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    scale = RatingScale(float(values.get("s_l", 1)), float(values.get("s_h", 5)),
                        int(values.get("n_s", 5)))
    return SimConfig(
        scale=scale,
        quality_dist=parse_distribution(values.get("dist", "uniform"), scale),
        n_f=int(values.get("n_f", 1000)),
        n_v=int(values.get("n_v", 4)),
        n_reps=int(values.get("reps", 1)),
        bias_spread=float(values.get("bias", 0.0)),
        seed=int(values.get("seed", 0)),
    )
