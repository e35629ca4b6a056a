"""Epoch subsampling of frequent items and popularity-based negative draws.

Both samplers are immutable once built and take the caller's Generator,
so concurrent use is safe and reproducibility is the caller's choice of
seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import InteractionDataset
from .errors import ConfigError, NumericError

MAX_REDRAWS = 10_000


@dataclass(frozen=True, slots=True)
class SubsamplerConfig:
    """Controls per-epoch thinning of interactions with popular items.

    ``threshold`` is the frequency scale: items whose (relative)
    frequency sits far above it are kept with probability shrinking
    roughly as threshold/frequency. With ``normalize_by_total`` on
    (default) frequency means item_degree / total_interactions, else the
    raw degree. ``discard_mode`` flips the formula's reading so its
    value acts as a discard probability instead; kept for A/B
    inspection, off by default.
    """

    threshold: float = 1e-6
    normalize_by_total: bool = True
    discard_mode: bool = False


def keep_probability(item_degree: int, total_interactions: int, cfg: SubsamplerConfig) -> float:
    """Probability that one interaction with this item survives an epoch.

    Computes p = (sqrt(f/t) + 1) * (t/f) clamped to [0, 1], where t is
    the threshold and f the item frequency. In discard mode the clamped
    value is treated as the removal probability and 1 - p is returned.
    """
    if cfg.threshold <= 0 or not math.isfinite(cfg.threshold):
        raise ConfigError(f"subsample threshold must be positive and finite, got {cfg.threshold}")
    if item_degree <= 0 or total_interactions <= 0:
        raise ConfigError("item degree and total interactions must be positive")
    f = item_degree / total_interactions if cfg.normalize_by_total else float(item_degree)
    ratio = f / cfg.threshold
    p = (math.sqrt(ratio) + 1.0) / ratio
    if not math.isfinite(p):
        raise NumericError(f"non-finite keep probability for frequency {f}")
    p = min(max(p, 0.0), 1.0)
    return 1.0 - p if cfg.discard_mode else p


def keep_probabilities(ds: InteractionDataset, cfg: SubsamplerConfig) -> np.ndarray:
    """Vector of per-item keep probabilities for a dataset."""
    total = ds.interaction_count
    return np.array(
        [keep_probability(int(z), total, cfg) for z in ds.item_degree], dtype=np.float64
    )


def apply_subsampling(
    ds: InteractionDataset, cfg: SubsamplerConfig, rng: np.random.Generator
) -> np.ndarray:
    """One epoch's interaction view: indices into the dataset's pair list.

    Each interaction is retained independently with the keep probability
    of its item. Call once per epoch with that epoch's generator; the
    view is resampled fresh every time.
    """
    probs = keep_probabilities(ds, cfg)
    draws = rng.random(ds.interaction_count)
    return np.nonzero(draws < probs[ds.items])[0]


class NegativeSampler:
    """Draws items with probability proportional to degree**exponent.

    Holds the item weights' prefix sums; a draw is one uniform plus a
    binary search, O(log item_count).
    """

    __slots__ = ("exponent", "cumulative_weights", "item_count")

    def __init__(self, exponent: float, cumulative_weights: np.ndarray):
        self.exponent = exponent
        self.cumulative_weights = cumulative_weights
        self.item_count = len(cumulative_weights)
        self.cumulative_weights.setflags(write=False)

    def probabilities(self) -> np.ndarray:
        """Analytic selection distribution implied by the weights."""
        w = np.diff(self.cumulative_weights, prepend=0.0)
        return w / self.cumulative_weights[-1]


def build_negative_sampler(item_degrees: np.ndarray, exponent: float) -> NegativeSampler:
    """Prepare a sampler over items weighted by degree**exponent.

    Every degree must be positive (guaranteed post-preprocessing), so
    weights are strictly positive for any real exponent.
    """
    degrees = np.asarray(item_degrees, dtype=np.float64)
    if degrees.size == 0:
        raise ConfigError("cannot build a negative sampler over zero items")
    if (degrees <= 0).any():
        raise ConfigError("all item degrees must be positive")
    if not math.isfinite(exponent):
        raise ConfigError(f"negative-sampling exponent must be finite, got {exponent}")
    weights = np.power(degrees, exponent)
    if not np.isfinite(weights).all():
        raise NumericError("non-finite negative-sampling weight; exponent too extreme for degrees")
    cum = np.cumsum(weights)
    return NegativeSampler(exponent, cum)


def _draw_items(
    sampler: NegativeSampler, shape: tuple[int, ...], rng: np.random.Generator
) -> np.ndarray:
    total = sampler.cumulative_weights[-1]
    r = rng.random(shape) * total
    return np.searchsorted(sampler.cumulative_weights, r, side="right").astype(np.int64)


def draw_negatives(
    sampler: NegativeSampler,
    positive_item: int,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample ``count`` items (with replacement), never the positive.

    Draws matching the positive are rejected and redrawn; a pathological
    weight profile that keeps colliding is fatal after 10000 rounds.
    """
    if count < 0:
        raise ConfigError("negative count must be non-negative")
    if count == 0:
        return np.empty(0, dtype=np.int64)
    if sampler.item_count < 2:
        raise ConfigError("need at least two items to draw negatives")
    out = _draw_items(sampler, (count,), rng)
    for _ in range(MAX_REDRAWS):
        bad = out == positive_item
        if not bad.any():
            return out
        out[bad] = _draw_items(sampler, (int(bad.sum()),), rng)
    raise NumericError(
        f"negative sampling could not avoid item {positive_item} after {MAX_REDRAWS} redraws"
    )


def draw_negatives_batch(
    sampler: NegativeSampler,
    positives: np.ndarray,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized :func:`draw_negatives` for a whole epoch.

    Returns an (n_pairs, count) array where row k avoids positives[k].
    """
    n = len(positives)
    if count == 0 or n == 0:
        return np.empty((n, count), dtype=np.int64)
    if sampler.item_count < 2:
        raise ConfigError("need at least two items to draw negatives")
    out = _draw_items(sampler, (n, count), rng)
    pos = np.asarray(positives, dtype=np.int64)[:, None]
    for _ in range(MAX_REDRAWS):
        bad = out == pos
        n_bad = int(bad.sum())
        if n_bad == 0:
            return out
        out[bad] = _draw_items(sampler, (n_bad,), rng)
    raise NumericError(f"negative sampling could not avoid positives after {MAX_REDRAWS} redraws")
