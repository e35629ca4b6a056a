"""Ranking strategies over a trained embedding model.

Five strategies share one shape: produce a relevance score per item for
a user, drop the user's history, keep the top N. Scores are cosine
similarities in the shared latent space; a zero-norm embedding has
cosine 0 against everything by convention. All functions here are pure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import InteractionDataset
from .errors import ConfigError
from .model import EmbeddingModel

logger = logging.getLogger(__name__)

STRATEGY_KINDS = ("user_item", "item_item", "weighted", "combined", "ensemble")


@dataclass(frozen=True, slots=True)
class StrategyConfig:
    """Which strategy to rank with, and its knobs.

    ``user_weight`` and ``item_weight`` blend the user-item and
    item-item scores for the weighted strategy. ``top_consumers`` is how
    many nearest consumers are averaged into each item's augmented
    profile for the combined strategy (None = all). ``depth`` is the
    per-method list length the ensemble votes over; ``use_method_weights``
    scales each method's votes by an externally supplied quality weight
    and ``use_rank_weights`` discounts votes logarithmically by rank.
    """

    kind: str = "item_item"
    top_n: int = 10
    user_weight: float = 0.5
    item_weight: float = 0.5
    top_consumers: int | None = None
    depth: int = 30
    use_method_weights: bool = False
    use_rank_weights: bool = False
    rank_weight_form: str = "log"

    def validate(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ConfigError(f"unknown strategy {self.kind!r}; expected one of {STRATEGY_KINDS}")
        if self.top_n < 1:
            raise ConfigError(f"top_n must be >= 1, got {self.top_n}")
        if self.rank_weight_form not in ("log", "linear"):
            raise ConfigError(
                f"rank_weight_form must be 'log' or 'linear', got {self.rank_weight_form!r}"
            )
        if self.kind == "weighted":
            if self.user_weight < 0 or self.item_weight < 0:
                raise ConfigError("strategy weights must be non-negative")
            if self.user_weight + self.item_weight <= 0:
                raise ConfigError("weighted strategy needs user_weight + item_weight > 0")
        if self.kind == "combined" and self.top_consumers is not None and self.top_consumers < 1:
            raise ConfigError(f"top_consumers must be >= 1 or None, got {self.top_consumers}")
        if self.kind == "ensemble" and self.depth < self.top_n:
            raise ConfigError(
                f"ensemble depth {self.depth} must cover top_n {self.top_n}"
            )


@dataclass(frozen=True, slots=True)
class Ranking:
    """An ordered recommendation list with its scores."""

    items: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return len(self.items)


@dataclass(slots=True)
class SimilarityEntry:
    """One seed item's nearest neighbors, or the reason it has none."""

    seed_key: str
    neighbors: list[tuple[str, float]]
    error: str | None = None


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; zero if either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ConfigError(f"cosine needs equal-length vectors, got {a.shape} and {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Rows scaled to unit norm; zero rows stay zero."""
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe


def user_item_scores(model: EmbeddingModel, u: int) -> np.ndarray:
    """Cosine of the user's embedding against every item embedding."""
    wu = model.user_vectors[u]
    nu = float(np.linalg.norm(wu))
    if nu == 0.0:
        return np.zeros(model.item_count)
    return unit_rows(model.item_vectors) @ (wu / nu)


def item_item_scores(
    model: EmbeddingModel,
    ds: InteractionDataset,
    u: int,
    item_matrix: np.ndarray | None = None,
) -> np.ndarray:
    """Mean cosine between each item and the user's consumed items.

    ``item_matrix`` substitutes the rows being compared (the combined
    strategy passes its augmented matrix); defaults to the model's item
    embeddings.
    """
    matrix = model.item_vectors if item_matrix is None else item_matrix
    if matrix.shape[0] != ds.item_count:
        raise ConfigError("item matrix row count must match the dataset's item count")
    history = ds.user_history(u)
    if len(history) == 0:
        return np.zeros(matrix.shape[0])
    normed = unit_rows(matrix)
    profile = normed[history].mean(axis=0)
    return normed @ profile


def weighted_scores(
    model: EmbeddingModel,
    ds: InteractionDataset,
    u: int,
    user_weight: float,
    item_weight: float,
) -> np.ndarray:
    """Convex blend of the user-item and item-item scores."""
    if user_weight < 0 or item_weight < 0 or user_weight + item_weight <= 0:
        raise ConfigError("weights must be non-negative with a positive sum")
    su = user_item_scores(model, u)
    si = item_item_scores(model, ds, u)
    return (user_weight * su + item_weight * si) / (user_weight + item_weight)


def combine_embeddings(
    model: EmbeddingModel, ds: InteractionDataset, top_consumers: int | None = None
) -> np.ndarray:
    """Augment each item embedding with its consumers' mean user embedding.

    For item i the appended block is the mean user vector over the
    ``top_consumers`` consumers of i whose embeddings are nearest to i
    by cosine (ties broken by user id; None means all consumers).
    Returns an (item_count, 2*dim) matrix, original coordinates first.
    """
    if top_consumers is not None and top_consumers < 1:
        raise ConfigError(f"top_consumers must be >= 1 or None, got {top_consumers}")
    out = np.zeros((model.item_count, 2 * model.dim))
    out[:, : model.dim] = model.item_vectors
    users_unit = unit_rows(model.user_vectors)
    items_unit = unit_rows(model.item_vectors)
    for i in range(model.item_count):
        consumers = ds.item_consumers(i)
        if len(consumers) == 0:
            continue
        if top_consumers is not None and top_consumers < len(consumers):
            sims = users_unit[consumers] @ items_unit[i]
            order = np.argsort(-sims, kind="stable")
            consumers = consumers[order[:top_consumers]]
        out[i, model.dim :] = model.user_vectors[consumers].mean(axis=0)
    return out


def combined_scores(
    model: EmbeddingModel,
    ds: InteractionDataset,
    u: int,
    top_consumers: int | None = None,
    augmented: np.ndarray | None = None,
) -> np.ndarray:
    """Item-item scoring over consumer-augmented item profiles.

    Building the augmented matrix is the expensive part; callers scoring
    many users should build it once and pass it in.
    """
    if augmented is None:
        augmented = combine_embeddings(model, ds, top_consumers)
    return item_item_scores(model, ds, u, item_matrix=augmented)


def top_n(scores: np.ndarray, consumed: np.ndarray | Sequence[int], n: int) -> Ranking:
    """Highest-scoring items outside the consumed set.

    Ordering is score descending with ties going to the lower item id;
    fewer than n candidates yields a shorter list.
    """
    if n < 1:
        raise ConfigError(f"top_n needs n >= 1, got {n}")
    scores = np.asarray(scores, dtype=np.float64)
    mask = np.ones(len(scores), dtype=bool)
    consumed = np.asarray(consumed, dtype=np.int64)
    if len(consumed):
        mask[consumed] = False
    candidates = np.nonzero(mask)[0]
    if len(candidates) == 0:
        return Ranking(np.empty(0, dtype=np.int64), np.empty(0))
    # candidates are id-ascending, so a stable sort on negated score
    # breaks ties toward the lower item id
    order = np.argsort(-scores[candidates], kind="stable")[:n]
    chosen = candidates[order]
    return Ranking(chosen, scores[chosen])


MethodFn = Callable[[int, int], Ranking]


def ensemble_rank(
    methods: Sequence[MethodFn],
    u: int,
    depth: int,
    n: int,
    method_weights: Sequence[float] | None = None,
    use_rank_weights: bool = True,
    rank_weight_form: str = "log",
) -> Ranking:
    """Vote the methods' top-``depth`` lists into one top-``n`` list.

    Each appearance of an item contributes its method's weight times a
    rank discount (rank is 1-based; discount 1 when rank weighting is
    off): 1/log2(rank + 1) in the default log form, (depth - rank + 1)
    / depth in the linear form. Ties break by summed underlying
    similarity, then by item id. Scores on the returned ranking are the
    vote totals.
    """
    if depth < n:
        raise ConfigError(f"ensemble depth {depth} must be >= n {n}")
    if not methods:
        raise ConfigError("ensemble needs at least one method")
    if method_weights is not None and len(method_weights) != len(methods):
        raise ConfigError("need one weight per method")
    if rank_weight_form not in ("log", "linear"):
        raise ConfigError(f"rank_weight_form must be 'log' or 'linear', got {rank_weight_form!r}")

    votes: dict[int, float] = {}
    sim_sum: dict[int, float] = {}
    for m, method in enumerate(methods):
        ranking = method(u, depth)
        weight = 1.0 if method_weights is None else float(method_weights[m])
        for rank0, (item, score) in enumerate(zip(ranking.items, ranking.scores)):
            item = int(item)
            if not use_rank_weights:
                discount = 1.0
            elif rank_weight_form == "linear":
                discount = (depth - rank0) / depth
            else:
                discount = 1.0 / np.log2(rank0 + 2.0)
            votes[item] = votes.get(item, 0.0) + weight * discount
            sim_sum[item] = sim_sum.get(item, 0.0) + float(score)

    ordered = sorted(votes, key=lambda it: (-votes[it], -sim_sum[it], it))[:n]
    return Ranking(
        np.array(ordered, dtype=np.int64),
        np.array([votes[it] for it in ordered]),
    )


def strategy_scores(
    model: EmbeddingModel,
    ds: InteractionDataset,
    u: int,
    cfg: StrategyConfig,
    augmented: np.ndarray | None = None,
) -> np.ndarray:
    """Score vector for any non-ensemble strategy (dispatch helper)."""
    cfg.validate()
    if cfg.kind == "user_item":
        return user_item_scores(model, u)
    if cfg.kind == "item_item":
        return item_item_scores(model, ds, u)
    if cfg.kind == "weighted":
        return weighted_scores(model, ds, u, cfg.user_weight, cfg.item_weight)
    if cfg.kind == "combined":
        return combined_scores(model, ds, u, cfg.top_consumers, augmented=augmented)
    raise ConfigError("ensemble strategies produce rankings, not score vectors")


def recommend_for_user(
    model: EmbeddingModel,
    ds: InteractionDataset,
    u: int,
    cfg: StrategyConfig,
    n: int | None = None,
    augmented: np.ndarray | None = None,
    method_weights: Sequence[float] | None = None,
) -> Ranking:
    """Top-N recommendations for one user under any strategy.

    The ensemble votes over the four score-based strategies (user-item,
    item-item, weighted, combined) at the configured depth; pass
    ``method_weights`` to weight them unequally.
    """
    cfg.validate()
    n = cfg.top_n if n is None else n
    consumed = ds.user_history(u)
    if cfg.kind != "ensemble":
        return top_n(strategy_scores(model, ds, u, cfg, augmented=augmented), consumed, n)

    aug = augmented if augmented is not None else combine_embeddings(model, ds, cfg.top_consumers)

    def wrap(scores_fn: Callable[[int], np.ndarray]) -> MethodFn:
        return lambda uu, d: top_n(scores_fn(uu), ds.user_history(uu), d)

    methods = [
        wrap(lambda uu: user_item_scores(model, uu)),
        wrap(lambda uu: item_item_scores(model, ds, uu)),
        wrap(lambda uu: weighted_scores(model, ds, uu, cfg.user_weight, cfg.item_weight)),
        wrap(lambda uu: combined_scores(model, ds, uu, cfg.top_consumers, augmented=aug)),
    ]
    weights = method_weights if cfg.use_method_weights else None
    if cfg.use_method_weights and weights is None:
        raise ConfigError("use_method_weights requires method_weights")
    return ensemble_rank(
        methods, u, cfg.depth, min(n, cfg.depth), method_weights=weights,
        use_rank_weights=cfg.use_rank_weights, rank_weight_form=cfg.rank_weight_form,
    )


def similarity_table(
    model: EmbeddingModel,
    ds: InteractionDataset,
    seed_keys: Sequence[str],
    k: int,
) -> list[SimilarityEntry]:
    """Nearest items (by cosine) to each seed item, as keyed rows.

    Unknown seed keys produce an error entry and processing continues.
    """
    if k < 1:
        raise ConfigError(f"neighbor count must be >= 1, got {k}")
    normed = unit_rows(model.item_vectors)
    entries: list[SimilarityEntry] = []
    for key in seed_keys:
        try:
            idx = ds.item_index(key)
        except Exception:
            entries.append(SimilarityEntry(key, [], error=f"unknown item key: {key!r}"))
            continue
        sims = normed @ normed[idx]
        sims[idx] = -np.inf
        order = np.argsort(-sims, kind="stable")[:k]
        entries.append(
            SimilarityEntry(key, [(ds.item_keys[j], float(sims[j])) for j in order])
        )
    return entries
