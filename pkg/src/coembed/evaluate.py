"""Offline evaluation: ranking metrics, strategy comparison, tuning.

Metrics are macro-averaged over users with non-empty ground truth. Each
user gets one top-20 ranking per strategy and every prefix N = 1..20 is
scored from it, so a report carries the full metric-vs-N curves.

The batch path caches normalized matrices and per-strategy score rows
(see EvalCache) so a grid search reuses work across its cells; its
results match the per-user functions in recommend exactly.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .data import InteractionDataset, SplitDataset
from .errors import CoembedError, ConfigError, DataError
from ._rng import seeded_rng
from .model import EmbeddingModel, TrainConfig, train
from .recommend import (
    Ranking,
    StrategyConfig,
    combine_embeddings,
    ensemble_rank,
    unit_rows,
)

logger = logging.getLogger(__name__)

N_MAX = 20
SELECTION_METRICS = ("precision", "recall", "f1", "ndcg")


def precision_recall_f1(
    ranking: Sequence[int], truth: set[int], n: int
) -> tuple[float, float, float]:
    """Precision, recall, and F1 of the top-n prefix against the truth set.

    Precision divides by min(n, len(ranking)) so a list shorter than n
    is not penalized for items it never emitted; recall divides by the
    truth size. Truth must be non-empty.
    """
    if n < 1:
        raise ConfigError(f"metric cutoff must be >= 1, got {n}")
    if not truth:
        raise ConfigError("metrics need a non-empty truth set")
    top = list(ranking[:n])
    hits = len(set(top) & truth)
    n_eff = min(n, len(ranking))
    p = hits / n_eff if n_eff else 0.0
    r = hits / len(truth)
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def ndcg(ranking: Sequence[int], truth: set[int], n: int) -> float:
    """Binary-relevance normalized discounted cumulative gain at n.

    A hit at 1-based position j contributes 1/log2(j + 1); the ideal
    value packs min(n, len(truth)) hits into the leading positions.
    """
    if n < 1:
        raise ConfigError(f"metric cutoff must be >= 1, got {n}")
    if not truth:
        raise ConfigError("metrics need a non-empty truth set")
    dcg = 0.0
    for pos, item in enumerate(ranking[:n], start=1):
        if item in truth:
            dcg += 1.0 / math.log2(pos + 1)
    ideal = sum(1.0 / math.log2(j + 1) for j in range(1, min(n, len(truth)) + 1))
    return dcg / ideal


@dataclass(slots=True)
class EvalReport:
    """Metric curves for one strategy on one evaluation set."""

    strategy: StrategyConfig
    eval_set: str
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    ndcg: np.ndarray
    users_evaluated: int
    users_excluded: int
    recommend_seconds: float
    train_seconds: float | None = None

    def at(self, metric: str, n: int) -> float:
        """One macro-averaged metric value at cutoff n."""
        if metric not in SELECTION_METRICS:
            raise ConfigError(f"unknown metric {metric!r}; expected one of {SELECTION_METRICS}")
        if n < 1 or n > N_MAX:
            raise ConfigError(f"cutoff must be in [1, {N_MAX}], got {n}")
        return float(getattr(self, metric)[n - 1])

    def lines(self) -> list[str]:
        out = [f"eval_set\t{self.eval_set}", f"strategy\t{describe_strategy(self.strategy)}"]
        out.append(f"users_evaluated\t{self.users_evaluated}")
        out.append(f"users_excluded\t{self.users_excluded}")
        out.append("n\tprecision\trecall\tf1\tndcg")
        for idx in range(N_MAX):
            out.append(
                f"{idx + 1}\t{self.precision[idx]:.6f}\t{self.recall[idx]:.6f}"
                f"\t{self.f1[idx]:.6f}\t{self.ndcg[idx]:.6f}"
            )
        return out


def describe_strategy(cfg: StrategyConfig) -> str:
    """Compact one-line form of a strategy config for tables and logs."""
    if cfg.kind == "weighted":
        return f"weighted(u={cfg.user_weight},i={cfg.item_weight})"
    if cfg.kind == "combined":
        k = "all" if cfg.top_consumers is None else cfg.top_consumers
        return f"combined(k={k})"
    if cfg.kind == "ensemble":
        return (
            f"ensemble(depth={cfg.depth},method_w={'y' if cfg.use_method_weights else 'n'},"
            f"rank_w={'y' if cfg.use_rank_weights else 'n'})"
        )
    return cfg.kind


class EvalCache:
    """Shared intermediates for evaluating many strategies of one model.

    Bound to one (split, model) pair. Holds the qualifying-user truth
    tables per evaluation set, unit-normalized matrices, per-strategy
    score rows, and per-strategy top rankings at the deepest depth asked
    for so far.
    """

    def __init__(self, split: SplitDataset, model: EmbeddingModel):
        if model.user_count != split.train.user_count or model.item_count != split.train.item_count:
            raise DataError(
                "embedding/dataset mismatch: model is "
                f"{model.user_count}x{model.item_count}, train partition is "
                f"{split.train.user_count}x{split.train.item_count}"
            )
        self.split = split
        self.model = model
        self._truth: dict[str, tuple[np.ndarray, list[np.ndarray]]] = {}
        self._unit_items: np.ndarray | None = None
        self._augmented: dict[object, np.ndarray] = {}
        self._scores: dict[object, np.ndarray] = {}
        self._rankings: dict[object, tuple[int, np.ndarray, np.ndarray, np.ndarray]] = {}

    def qualifying(self, eval_set: str) -> tuple[np.ndarray, list[np.ndarray]]:
        """Users with non-empty truth in the set, plus their truth arrays."""
        if eval_set not in self._truth:
            holdout = self.split.holdout(eval_set)
            per_user: dict[int, list[int]] = {}
            for u, i in holdout:
                per_user.setdefault(int(u), []).append(int(i))
            users = np.array(sorted(per_user), dtype=np.int64)
            truths = [np.array(per_user[int(u)], dtype=np.int64) for u in users]
            self._truth[eval_set] = (users, truths)
        return self._truth[eval_set]

    @property
    def unit_items(self) -> np.ndarray:
        if self._unit_items is None:
            self._unit_items = unit_rows(self.model.item_vectors)
        return self._unit_items

    def augmented(self, top_consumers: int | None) -> np.ndarray:
        key = "all" if top_consumers is None else int(top_consumers)
        if key not in self._augmented:
            self._augmented[key] = combine_embeddings(self.model, self.split.train, top_consumers)
        return self._augmented[key]

    def _profiles(self, users: np.ndarray, matrix_unit: np.ndarray) -> np.ndarray:
        ds = self.split.train
        out = np.zeros((len(users), matrix_unit.shape[1]))
        for row, u in enumerate(users):
            hist = ds.user_history(int(u))
            out[row] = matrix_unit[hist].mean(axis=0)
        return out

    def score_rows(self, cfg: StrategyConfig, eval_set: str) -> np.ndarray:
        """Score matrix (qualifying users x items) for a score strategy."""
        users, _ = self.qualifying(eval_set)
        key = (eval_set, _score_key(cfg))
        if key in self._scores:
            return self._scores[key]
        if cfg.kind == "user_item":
            wu = unit_rows(self.model.user_vectors[users])
            rows = wu @ self.unit_items.T
        elif cfg.kind == "item_item":
            rows = self._profiles(users, self.unit_items) @ self.unit_items.T
        elif cfg.kind == "weighted":
            su = self.score_rows(replace(cfg, kind="user_item"), eval_set)
            si = self.score_rows(replace(cfg, kind="item_item"), eval_set)
            rows = (cfg.user_weight * su + cfg.item_weight * si) / (
                cfg.user_weight + cfg.item_weight
            )
        elif cfg.kind == "combined":
            aug_unit = unit_rows(self.augmented(cfg.top_consumers))
            rows = self._profiles(users, aug_unit) @ aug_unit.T
        else:
            raise ConfigError("ensemble has no score matrix; use rankings()")
        self._scores[key] = rows
        return rows

    def rankings(
        self, cfg: StrategyConfig, eval_set: str, depth: int
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Top-``depth`` rankings per qualifying user for a score strategy.

        Returns (items, scores, lengths): (n_users, depth) arrays plus
        the per-user valid length (shorter when the user has consumed
        all but fewer than depth items).
        """
        users, _ = self.qualifying(eval_set)
        key = (eval_set, _score_key(cfg))
        hit = self._rankings.get(key)
        if hit is not None and hit[0] >= depth:
            cached_depth, items, scores, lengths = hit
            return items[:, :depth], scores[:, :depth], np.minimum(lengths, depth)

        rows = self.score_rows(cfg, eval_set)
        ds = self.split.train
        masked = -rows.copy()
        lengths = np.empty(len(users), dtype=np.int64)
        for r, u in enumerate(users):
            hist = ds.user_history(int(u))
            masked[r, hist] = np.inf
            lengths[r] = min(depth, ds.item_count - len(hist))
        # stable sort on negated score: ties fall to the lower item id
        order = np.argsort(masked, axis=1, kind="stable")[:, :depth]
        scores = np.take_along_axis(rows, order, axis=1)
        self._rankings[key] = (depth, order, scores, lengths)
        return order, scores, lengths


def _score_key(cfg: StrategyConfig) -> object:
    if cfg.kind == "user_item" or cfg.kind == "item_item":
        return cfg.kind
    if cfg.kind == "weighted":
        return ("weighted", cfg.user_weight, cfg.item_weight)
    if cfg.kind == "combined":
        return ("combined", "all" if cfg.top_consumers is None else cfg.top_consumers)
    raise ConfigError(f"no score key for strategy {cfg.kind!r}")


def _ensemble_user_rankings(
    cache: EvalCache,
    cfg: StrategyConfig,
    eval_set: str,
    method_weights: Sequence[float] | None,
) -> list[Ranking]:
    """Per-user ensemble rankings served from cached base rankings."""
    users, _ = cache.qualifying(eval_set)
    depth = cfg.depth
    base_cfgs = [
        replace(cfg, kind="user_item"),
        replace(cfg, kind="item_item"),
        replace(cfg, kind="weighted"),
        replace(cfg, kind="combined"),
    ]
    bases = [cache.rankings(b, eval_set, depth) for b in base_cfgs]
    if cfg.use_method_weights and method_weights is None:
        raise ConfigError("use_method_weights requires method_weights")
    weights = list(method_weights) if cfg.use_method_weights else None

    out: list[Ranking] = []
    for row in range(len(users)):
        def method_for(base):
            items, scores, lengths = base
            valid = int(lengths[row])

            def method(_u: int, d: int) -> Ranking:
                take = min(d, valid)
                return Ranking(items[row, :take], scores[row, :take])

            return method

        methods = [method_for(b) for b in bases]
        out.append(
            ensemble_rank(
                methods,
                int(users[row]),
                depth,
                min(N_MAX, depth),
                method_weights=weights,
                use_rank_weights=cfg.use_rank_weights,
                rank_weight_form=cfg.rank_weight_form,
            )
        )
    return out


# cumulative ideal gains: _IDCG[k] = sum_{j=1..k} 1/log2(j+1)
_IDCG = np.concatenate([[0.0], np.cumsum(1.0 / np.log2(np.arange(2, N_MAX + 2)))])


def _metric_curves(
    rankings: list[Ranking], truths: list[np.ndarray]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Macro-averaged precision/recall/f1/ndcg for every prefix 1..20."""
    n_users = len(rankings)
    acc = np.zeros((4, N_MAX))
    ns = np.arange(1, N_MAX + 1)
    for ranking, truth in zip(rankings, truths):
        items = ranking.items[:N_MAX]
        hit = np.isin(items, truth).astype(np.float64)
        hits_cum = np.zeros(N_MAX)
        hits_cum[: len(items)] = np.cumsum(hit)
        if len(items) < N_MAX:
            hits_cum[len(items) :] = hits_cum[len(items) - 1] if len(items) else 0.0
        n_eff = np.minimum(ns, max(len(items), 1)).astype(np.float64)
        p = hits_cum / n_eff
        r = hits_cum / len(truth)
        denom = p + r
        f1 = np.where(denom > 0, 2 * p * r / np.where(denom > 0, denom, 1.0), 0.0)
        gains = np.zeros(N_MAX)
        gains[: len(items)] = hit / np.log2(np.arange(2, len(items) + 2))
        dcg = np.cumsum(gains)
        ideal = _IDCG[np.minimum(ns, len(truth))]
        acc[0] += p
        acc[1] += r
        acc[2] += f1
        acc[3] += dcg / ideal
    acc /= n_users
    return acc[0], acc[1], acc[2], acc[3]


def evaluate(
    split: SplitDataset,
    model: EmbeddingModel,
    strategy: StrategyConfig,
    eval_set: str = "validation",
    cache: EvalCache | None = None,
    method_weights: Sequence[float] | None = None,
    train_seconds: float | None = None,
) -> EvalReport:
    """Score one strategy against a held-out set.

    Builds each qualifying user's top-20 ranking once (capped at the
    ensemble depth when that is smaller) and evaluates every prefix.
    Users without ground truth in the set are excluded from the macro
    average; having none at all is fatal.
    """
    strategy.validate()
    if cache is None:
        cache = EvalCache(split, model)
    elif cache.model is not model:
        raise ConfigError("cache is bound to a different model")
    users, truths = cache.qualifying(eval_set)
    if len(users) == 0:
        raise DataError(f"no users with ground truth in {eval_set!r}")

    started = time.perf_counter()
    if strategy.kind == "ensemble":
        rankings = _ensemble_user_rankings(cache, strategy, eval_set, method_weights)
    else:
        depth = N_MAX
        items, scores, lengths = cache.rankings(strategy, eval_set, depth)
        rankings = [
            Ranking(items[r, : lengths[r]], scores[r, : lengths[r]]) for r in range(len(users))
        ]
    recommend_seconds = time.perf_counter() - started

    p, r, f1, nd = _metric_curves(rankings, truths)
    return EvalReport(
        strategy=strategy,
        eval_set=eval_set,
        precision=p,
        recall=r,
        f1=f1,
        ndcg=nd,
        users_evaluated=len(users),
        users_excluded=split.train.user_count - len(users),
        recommend_seconds=recommend_seconds,
        train_seconds=train_seconds,
    )


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Value lists for a tuning grid; unset sides keep their defaults.

    One instance describes the model side (dims, negatives,
    neg_exponents) and another the strategy side (the rest). The
    selection metric picks the winner; ties go to the earlier cell in
    declared order.
    """

    dims: tuple[int, ...] = (100,)
    negatives: tuple[int, ...] = (5,)
    neg_exponents: tuple[float, ...] = (0.75,)
    user_weights: tuple[float, ...] = (0.5,)
    item_weights: tuple[float, ...] = (0.5,)
    consumer_counts: tuple[int | None, ...] = (None,)
    depths: tuple[int, ...] = (30,)
    method_weight_flags: tuple[bool, ...] = (False,)
    rank_weight_flags: tuple[bool, ...] = (False,)
    selection_metric: str = "ndcg"
    selection_n: int = 15

    @classmethod
    def model_defaults(cls) -> "GridSpec":
        """The model-side search grid used throughout: dimensionality,
        negatives per positive, and the sampling exponent."""
        return cls(dims=(50, 100, 150), negatives=(5, 10, 15), neg_exponents=(-1.0, -0.5, 0.5, 1.0))

    @classmethod
    def strategy_defaults(cls) -> "GridSpec":
        """The strategy-side grid: blend weights, consumer counts,
        ensemble depths, and both ensemble weighting flags."""
        return cls(
            user_weights=(0.1, 0.25, 0.5, 0.75, 0.9),
            item_weights=(0.1, 0.25, 0.5, 0.75, 0.9),
            consumer_counts=(1, 5, 10, 15, None),
            depths=(15, 30, 45),
            method_weight_flags=(True, False),
            rank_weight_flags=(True, False),
        )

    def validate(self) -> None:
        if self.selection_metric not in SELECTION_METRICS:
            raise ConfigError(f"unknown selection metric {self.selection_metric!r}")
        if self.selection_n < 1 or self.selection_n > N_MAX:
            raise ConfigError(f"selection_n must be in [1, {N_MAX}]")
        for name in ("dims", "negatives", "neg_exponents", "user_weights", "item_weights",
                     "consumer_counts", "depths", "method_weight_flags", "rank_weight_flags"):
            if not getattr(self, name):
                raise ConfigError(f"grid list {name} must not be empty")


@dataclass(slots=True)
class GridRow:
    """Outcome of one grid cell."""

    train_config: TrainConfig
    strategy: StrategyConfig | None
    value: float
    status: str = "ok"


@dataclass(slots=True)
class GridSearchResult:
    best_train: TrainConfig
    best_strategy: StrategyConfig
    best_value: float
    best_method_weights: list[float] | None
    selection_metric: str
    selection_n: int
    rows: list[GridRow] = field(default_factory=list)


def _strategy_cells(grid: GridSpec) -> list[StrategyConfig]:
    """Strategy grid in declared order; ensemble blend/consumer knobs are
    filled in later from the best weighted/combined cells."""
    cells: list[StrategyConfig] = [
        StrategyConfig(kind="user_item", top_n=N_MAX),
        StrategyConfig(kind="item_item", top_n=N_MAX),
    ]
    for b, m in itertools.product(grid.user_weights, grid.item_weights):
        cells.append(StrategyConfig(kind="weighted", top_n=N_MAX, user_weight=b, item_weight=m))
    for k in grid.consumer_counts:
        cells.append(StrategyConfig(kind="combined", top_n=N_MAX, top_consumers=k))
    for depth, wm, wr in itertools.product(
        grid.depths, grid.method_weight_flags, grid.rank_weight_flags
    ):
        cells.append(
            StrategyConfig(
                kind="ensemble",
                top_n=min(N_MAX, depth),
                depth=depth,
                use_method_weights=wm,
                use_rank_weights=wr,
            )
        )
    return cells


def grid_search(
    split: SplitDataset,
    model_grid: GridSpec | None = None,
    strategy_grid: GridSpec | None = None,
    base_config: TrainConfig = TrainConfig(),
    eval_set: str = "validation",
) -> GridSearchResult:
    """Exhaustive search over model and strategy hyperparameters.

    For each model-side point one model is trained and every strategy
    cell is evaluated against it on the held-out set. Ensemble cells
    inherit the best weighted and combined settings found so far for
    that model, and their method weights are those cells' metric values.
    A failing cell is recorded and skipped. Ties on the selection metric
    keep the earliest cell.
    """
    model_grid = model_grid or GridSpec.model_defaults()
    strategy_grid = strategy_grid or GridSpec.strategy_defaults()
    model_grid.validate()
    strategy_grid.validate()
    metric, sel_n = strategy_grid.selection_metric, strategy_grid.selection_n

    rows: list[GridRow] = []
    best: tuple[float, TrainConfig, StrategyConfig, list[float] | None] | None = None

    for dim, negs, exponent in itertools.product(
        model_grid.dims, model_grid.negatives, model_grid.neg_exponents
    ):
        train_cfg = replace(base_config, dim=dim, negatives=negs, neg_exponent=exponent)
        t0 = time.perf_counter()
        try:
            model, _ = train(split.train, train_cfg)
        except CoembedError as exc:
            logger.warning("grid: training failed for %s: %s", train_cfg, exc)
            rows.append(GridRow(train_cfg, None, float("nan"), f"train_failed: {exc}"))
            continue
        train_seconds = time.perf_counter() - t0
        cache = EvalCache(split, model)

        best_weighted: tuple[float, StrategyConfig] | None = None
        best_combined: tuple[float, StrategyConfig] | None = None
        base_values: dict[str, float] = {}

        for cell in _strategy_cells(strategy_grid):
            weights: list[float] | None = None
            if cell.kind == "ensemble":
                if best_weighted is not None:
                    cell = replace(
                        cell,
                        user_weight=best_weighted[1].user_weight,
                        item_weight=best_weighted[1].item_weight,
                    )
                if best_combined is not None:
                    cell = replace(cell, top_consumers=best_combined[1].top_consumers)
                if cell.use_method_weights:
                    weights = [
                        base_values.get("user_item", 0.0),
                        base_values.get("item_item", 0.0),
                        best_weighted[0] if best_weighted else 0.0,
                        best_combined[0] if best_combined else 0.0,
                    ]
            try:
                report = evaluate(
                    split,
                    model,
                    cell,
                    eval_set=eval_set,
                    cache=cache,
                    method_weights=weights,
                    train_seconds=train_seconds,
                )
                value = report.at(metric, sel_n)
            except CoembedError as exc:
                logger.warning("grid: cell %s failed: %s", describe_strategy(cell), exc)
                rows.append(GridRow(train_cfg, cell, float("nan"), f"failed: {exc}"))
                continue
            rows.append(GridRow(train_cfg, cell, value))
            if cell.kind == "user_item" or cell.kind == "item_item":
                base_values[cell.kind] = value
            elif cell.kind == "weighted":
                if best_weighted is None or value > best_weighted[0]:
                    best_weighted = (value, cell)
            elif cell.kind == "combined":
                if best_combined is None or value > best_combined[0]:
                    best_combined = (value, cell)
            if best is None or value > best[0]:
                best = (value, train_cfg, cell, weights)
        logger.info(
            "grid: model dim=%d negatives=%d exponent=%.2f done in %.1fs",
            dim, negs, exponent, time.perf_counter() - t0,
        )

    if best is None:
        raise DataError("every grid cell failed")
    return GridSearchResult(
        best_train=best[1],
        best_strategy=best[2],
        best_value=best[0],
        best_method_weights=best[3],
        selection_metric=metric,
        selection_n=sel_n,
        rows=rows,
    )


SWEEPABLE = (
    "learning_rate",
    "dim",
    "epochs",
    "subsample",
    "negatives",
    "neg_exponent",
    "regularization",
)


@dataclass(slots=True)
class SweepResult:
    parameter: str
    values: list[float]
    metric_values: list[float]
    reports: list[EvalReport]


def sensitivity_sweep(
    split: SplitDataset,
    parameter: str,
    values: Sequence,
    fixed: TrainConfig,
    strategy: StrategyConfig = StrategyConfig(kind="item_item", top_n=15),
    eval_set: str = "validation",
    metric: str = "ndcg",
    metric_n: int = 15,
) -> SweepResult:
    """Vary one training hyperparameter, holding the rest fixed.

    Trains one model per value and reports the metric curve point
    (default NDCG at 15) on the held-out set.
    """
    if parameter not in SWEEPABLE:
        raise ConfigError(f"unknown sweep parameter {parameter!r}; expected one of {SWEEPABLE}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    curve: list[float] = []
    reports: list[EvalReport] = []
    for value in values:
        if parameter in ("dim", "epochs", "negatives"):
            value = int(value)
        cfg = replace(fixed, **{parameter: value})
        t0 = time.perf_counter()
        model, _ = train(split.train, cfg)
        report = evaluate(
            split, model, strategy, eval_set=eval_set, train_seconds=time.perf_counter() - t0
        )
        curve.append(report.at(metric, metric_n))
        reports.append(report)
        logger.info("sweep %s=%s: %s@%d = %.4f", parameter, value, metric, metric_n, curve[-1])
    return SweepResult(parameter, [float(v) for v in values], curve, reports)


@dataclass(slots=True)
class ScalingRow:
    fraction: float
    interactions: int
    times: list[float]
    mean_seconds: float
    std_seconds: float


@dataclass(slots=True)
class ScalingReport:
    rows: list[ScalingRow]
    slope: float | None
    intercept: float | None
    r_squared: float | None


def _subset_dataset(ds: InteractionDataset, size: int, rng: np.random.Generator) -> InteractionDataset:
    idx = rng.permutation(ds.interaction_count)[:size]
    pairs = [(ds.user_keys[ds.users[k]], ds.item_keys[ds.items[k]]) for k in idx]
    return InteractionDataset.from_keyed_pairs(pairs)


def benchmark_scaling(
    ds: InteractionDataset,
    cfg: TrainConfig,
    fractions: Sequence[float] = (0.25, 0.5, 0.75, 1.0),
    repetitions: int = 3,
    seed: int = 0,
) -> ScalingReport:
    """Training wall-time versus interaction count.

    Each fraction is timed over independent random subsets (training
    only; subset construction is excluded), then mean time is fit
    against interaction count by least squares. The fit is omitted when
    only one distinct size is measured. The kernel is warmed up first so
    compilation does not pollute the first sample.
    """
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if not fractions:
        raise ConfigError("need at least one fraction")
    for f in fractions:
        if not (0.0 < f <= 1.0):
            raise ConfigError(f"fractions must lie in (0, 1], got {f}")

    # warmup: tiny throwaway training run to absorb one-time compilation.
    # subsample is forced wide open so the kernel is guaranteed to execute;
    # at 4 pairs every item frequency is 0.5 and a realistic threshold would
    # discard the whole epoch, leaving the compile cost inside the first rep.
    warm_pairs = [("wa", "x"), ("wa", "y"), ("wb", "x"), ("wb", "y")]
    warm_ds = InteractionDataset.from_keyed_pairs(warm_pairs)
    train(warm_ds, replace(cfg, dim=min(cfg.dim, 8), epochs=1, subsample=1.0))

    rows: list[ScalingRow] = []
    draw = 0
    for fraction in fractions:
        size = max(1, round(fraction * ds.interaction_count))
        times: list[float] = []
        for _ in range(repetitions):
            sub = _subset_dataset(ds, size, seeded_rng(seed, 3, draw))
            draw += 1
            t0 = time.perf_counter()
            train(sub, cfg)
            times.append(time.perf_counter() - t0)
        rows.append(
            ScalingRow(
                fraction=float(fraction),
                interactions=size,
                times=times,
                mean_seconds=float(np.mean(times)),
                std_seconds=float(np.std(times)),
            )
        )
        logger.info("bench: %.0f%% (%d pairs) mean %.3fs", fraction * 100, size, rows[-1].mean_seconds)

    xs = np.array([r.interactions for r in rows], dtype=np.float64)
    ys = np.array([r.mean_seconds for r in rows])
    if len(np.unique(xs)) < 2:
        return ScalingReport(rows, None, None, None)
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ScalingReport(rows, float(slope), float(intercept), r_squared)
