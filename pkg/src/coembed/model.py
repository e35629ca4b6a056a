"""Embedding model and its optimizer.

Two matrices are learned jointly: one row per user and one row per item,
in a shared latent space. Training walks user-item pairs, pushes the
sigmoid of their dot product toward 1, pushes it toward 0 for sampled
negatives, and applies an L2 penalty to every touched row. Updates are
sparse Adam steps: only rows touched by a pair move, with one global
step counter for bias correction.

The epoch loop is compiled with numba; all randomness (subsampling,
shuffling, negative draws) happens outside the kernel from per-epoch
generators, so deterministic mode is bit-reproducible.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from ._binio import expect_magic, read_matrix_f32, read_u16, read_u32, write_matrix_f32, write_u16, write_u32
from ._rng import seeded_rng
from .data import InteractionDataset
from .errors import ConfigError, DataError, NumericError
from .sampling import (
    SubsamplerConfig,
    apply_subsampling,
    build_negative_sampler,
    draw_negatives_batch,
)

logger = logging.getLogger(__name__)

EMBEDDING_MAGIC = b"I2VE"
EMBEDDING_VERSION = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True, slots=True)
class TrainConfig:
    """Hyperparameters for :func:`train`.

    ``workers`` = 0 runs single-threaded and deterministic; any positive
    value shards each epoch across lock-free threads sharing the
    matrices, which is faster but not reproducible.
    """

    dim: int = 100
    learning_rate: float = 0.25
    epochs: int = 50
    subsample: float = 1e-6
    negatives: int = 5
    neg_exponent: float = 0.75
    regularization: float = 0.1
    seed: int = 0
    workers: int = 0

    def validate(self, item_count: int | None = None) -> None:
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0 or not math.isfinite(self.learning_rate):
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.subsample <= 0 or not math.isfinite(self.subsample):
            raise ConfigError(f"subsample threshold must be positive, got {self.subsample}")
        if self.negatives < 0:
            raise ConfigError(f"negative count must be >= 0, got {self.negatives}")
        if self.regularization < 0 or not math.isfinite(self.regularization):
            raise ConfigError(f"regularization must be >= 0, got {self.regularization}")
        if self.workers < 0:
            raise ConfigError(f"workers must be >= 0, got {self.workers}")
        if not math.isfinite(self.neg_exponent):
            raise ConfigError("negative-sampling exponent must be finite")
        if item_count is not None and self.negatives > 0 and item_count < 2:
            raise ConfigError("negative sampling needs at least two items")


class EmbeddingModel:
    """User and item embedding matrices (float64, row per entity)."""

    __slots__ = ("user_vectors", "item_vectors")

    def __init__(self, user_vectors: np.ndarray, item_vectors: np.ndarray):
        if user_vectors.ndim != 2 or item_vectors.ndim != 2:
            raise ConfigError("embedding matrices must be 2-d")
        if user_vectors.shape[1] != item_vectors.shape[1]:
            raise ConfigError("user and item embeddings must share a dimension")
        self.user_vectors = np.ascontiguousarray(user_vectors, dtype=np.float64)
        self.item_vectors = np.ascontiguousarray(item_vectors, dtype=np.float64)

    @property
    def user_count(self) -> int:
        return self.user_vectors.shape[0]

    @property
    def item_count(self) -> int:
        return self.item_vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.user_vectors.shape[1]


@dataclass(slots=True)
class AdamState:
    """First/second moment accumulators plus the shared step counter."""

    m_user: np.ndarray
    v_user: np.ndarray
    m_item: np.ndarray
    v_item: np.ndarray
    t: int = 0

    @classmethod
    def for_model(cls, model: EmbeddingModel) -> "AdamState":
        return cls(
            np.zeros_like(model.user_vectors),
            np.zeros_like(model.user_vectors),
            np.zeros_like(model.item_vectors),
            np.zeros_like(model.item_vectors),
        )


def init_model(user_count: int, item_count: int, dim: int, seed: int) -> EmbeddingModel:
    """Fresh model with entries i.i.d. uniform in (-0.5/dim, +0.5/dim)."""
    if user_count < 1 or item_count < 1 or dim < 1:
        raise ConfigError("model needs at least one user, one item, and one dimension")
    rng = seeded_rng(seed, 0, 0)
    half = 0.5 / dim
    users = rng.uniform(-half, half, size=(user_count, dim))
    items = rng.uniform(-half, half, size=(item_count, dim))
    return EmbeddingModel(users, items)


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _softplus(x: float) -> float:
    # log(1 + e^x) without overflow
    return math.log1p(math.exp(-abs(x))) + max(x, 0.0)


def score_pair(model: EmbeddingModel, u: int, i: int) -> float:
    """Sigmoid affinity of user u for item i."""
    return _sigmoid(float(np.dot(model.user_vectors[u], model.item_vectors[i])))


def pair_loss_and_gradients(
    model: EmbeddingModel,
    u: int,
    positive: int,
    negatives: Sequence[int],
    regularization: float,
) -> tuple[float, np.ndarray, list[int], np.ndarray]:
    """Loss and analytic gradients for one training pair, no update.

    The loss is -log sigmoid(u . pos) - sum_j log(1 - sigmoid(u . j))
    plus the L2 penalty on the user row, the positive row, and each
    negative occurrence. Returns (loss, user_gradient, touched_items,
    item_gradients); duplicate negatives accumulate into one row entry.
    """
    W = model.user_vectors
    Wp = model.item_vectors
    wu = W[u]
    lam = regularization

    touched: list[int] = [positive]
    slot_of: dict[int, int] = {positive: 0}
    grads = [np.zeros_like(wu)]

    dot_pos = float(np.dot(wu, Wp[positive]))
    e_pos = _sigmoid(dot_pos) - 1.0
    loss = _softplus(-dot_pos)
    loss += lam * (float(np.dot(wu, wu)) + float(np.dot(Wp[positive], Wp[positive])))
    g_user = e_pos * Wp[positive].copy()
    grads[0] += e_pos * wu + 2.0 * lam * Wp[positive]

    for j in negatives:
        j = int(j)
        if j == positive:
            raise ConfigError("negative draw equals the positive item")
        dot_j = float(np.dot(wu, Wp[j]))
        e_j = _sigmoid(dot_j)
        loss += _softplus(dot_j) + lam * float(np.dot(Wp[j], Wp[j]))
        g_user += e_j * Wp[j]
        contrib = e_j * wu + 2.0 * lam * Wp[j]
        slot = slot_of.get(j)
        if slot is None:
            slot_of[j] = len(touched)
            touched.append(j)
            grads.append(contrib.copy())
        else:
            grads[slot] += contrib

    g_user += 2.0 * lam * wu
    return loss, g_user, touched, np.array(grads)


def _adam_row(matrix, m, v, row, grad, lr, t):
    bc1 = 1.0 - ADAM_BETA1**t
    bc2 = 1.0 - ADAM_BETA2**t
    m[row] = ADAM_BETA1 * m[row] + (1.0 - ADAM_BETA1) * grad
    v[row] = ADAM_BETA2 * v[row] + (1.0 - ADAM_BETA2) * grad * grad
    matrix[row] -= lr * (m[row] / bc1) / (np.sqrt(v[row] / bc2) + ADAM_EPS)


def train_pair(
    model: EmbeddingModel,
    opt: AdamState,
    u: int,
    positive: int,
    negatives: Sequence[int],
    cfg: TrainConfig,
) -> float:
    """One sparse optimization step on a single pair; returns its loss.

    Only the user row, the positive item row, and the negative item rows
    move; the step counter advances once.
    """
    loss, g_user, touched, item_grads = pair_loss_and_gradients(
        model, u, positive, negatives, cfg.regularization
    )
    opt.t += 1
    _adam_row(model.user_vectors, opt.m_user, opt.v_user, u, g_user, cfg.learning_rate, opt.t)
    for slot, row in enumerate(touched):
        _adam_row(
            model.item_vectors, opt.m_item, opt.v_item, row, item_grads[slot], cfg.learning_rate, opt.t
        )
    return loss


def batch_loss(
    model: EmbeddingModel, pairs: Sequence[tuple[int, int, int]], regularization: float
) -> float:
    """Total loss over labeled (user, item, label) pairs, no update.

    Cross-entropy per pair plus the L2 penalty counted once per distinct
    touched row. Empty input scores zero. Used for gradient checks and
    convergence monitoring.
    """
    loss = 0.0
    users_seen: set[int] = set()
    items_seen: set[int] = set()
    for u, i, label in pairs:
        if label not in (0, 1):
            raise ConfigError(f"pair label must be 0 or 1, got {label!r}")
        dot = float(np.dot(model.user_vectors[u], model.item_vectors[i]))
        loss += _softplus(-dot) if label else _softplus(dot)
        users_seen.add(u)
        items_seen.add(i)
    for u in users_seen:
        loss += regularization * float(np.dot(model.user_vectors[u], model.user_vectors[u]))
    for i in items_seen:
        loss += regularization * float(np.dot(model.item_vectors[i], model.item_vectors[i]))
    return loss


@njit(nogil=True, cache=True)
def _run_pairs(W, Wp, mW, vW, mI, vI, users, positives, negs, t0, lr, lam, b1, b2, eps):
    """Sequential pair updates over prepared arrays; returns (loss_sum, t)."""
    n = users.shape[0]
    n_neg = negs.shape[1]
    dim = W.shape[1]
    touched = np.empty(n_neg + 1, np.int64)
    grads = np.empty((n_neg + 1, dim), np.float64)
    g_user = np.empty(dim, np.float64)
    loss_sum = 0.0
    t = t0

    for k in range(n):
        u = users[k]
        pos = positives[k]
        loss = 0.0

        # positive term
        dot = 0.0
        for l in range(dim):
            dot += W[u, l] * Wp[pos, l]
        if dot >= 0.0:
            phi = 1.0 / (1.0 + np.exp(-dot))
        else:
            z = np.exp(dot)
            phi = z / (1.0 + z)
        loss += np.log1p(np.exp(-abs(dot))) + max(-dot, 0.0)
        e_pos = phi - 1.0
        wu_sq = 0.0
        wp_sq = 0.0
        for l in range(dim):
            wu_sq += W[u, l] * W[u, l]
            wp_sq += Wp[pos, l] * Wp[pos, l]
            g_user[l] = e_pos * Wp[pos, l]
            grads[0, l] = e_pos * W[u, l] + 2.0 * lam * Wp[pos, l]
        loss += lam * (wu_sq + wp_sq)
        touched[0] = pos
        n_touched = 1

        # negative terms, duplicates folded into one row slot
        for g in range(n_neg):
            j = negs[k, g]
            dot = 0.0
            for l in range(dim):
                dot += W[u, l] * Wp[j, l]
            if dot >= 0.0:
                phi = 1.0 / (1.0 + np.exp(-dot))
            else:
                z = np.exp(dot)
                phi = z / (1.0 + z)
            wj_sq = 0.0
            for l in range(dim):
                wj_sq += Wp[j, l] * Wp[j, l]
            loss += np.log1p(np.exp(-abs(dot))) + max(dot, 0.0) + lam * wj_sq
            slot = -1
            for s in range(n_touched):
                if touched[s] == j:
                    slot = s
                    break
            if slot < 0:
                slot = n_touched
                touched[slot] = j
                n_touched += 1
                for l in range(dim):
                    grads[slot, l] = phi * W[u, l] + 2.0 * lam * Wp[j, l]
            else:
                for l in range(dim):
                    grads[slot, l] += phi * W[u, l] + 2.0 * lam * Wp[j, l]
            for l in range(dim):
                g_user[l] += phi * Wp[j, l]

        for l in range(dim):
            g_user[l] += 2.0 * lam * W[u, l]

        # one Adam step per touched row, shared counter
        t += 1
        bc1 = 1.0 - b1**t
        bc2 = 1.0 - b2**t
        for l in range(dim):
            gv = g_user[l]
            mW[u, l] = b1 * mW[u, l] + (1.0 - b1) * gv
            vW[u, l] = b2 * vW[u, l] + (1.0 - b2) * gv * gv
            W[u, l] -= lr * (mW[u, l] / bc1) / (np.sqrt(vW[u, l] / bc2) + eps)
        for s in range(n_touched):
            r = touched[s]
            for l in range(dim):
                gv = grads[s, l]
                mI[r, l] = b1 * mI[r, l] + (1.0 - b1) * gv
                vI[r, l] = b2 * vI[r, l] + (1.0 - b2) * gv * gv
                Wp[r, l] -= lr * (mI[r, l] / bc1) / (np.sqrt(vI[r, l] / bc2) + eps)

        loss_sum += loss
    return loss_sum, t


def _epoch_arrays(
    ds: InteractionDataset,
    cfg: TrainConfig,
    sampler,
    sub_cfg: SubsamplerConfig,
    epoch: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Subsample, shuffle, and draw negatives for one epoch."""
    rng = seeded_rng(cfg.seed, 1, epoch)
    view = apply_subsampling(ds, sub_cfg, rng)
    if len(view) == 0:
        return (
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty((0, cfg.negatives), dtype=np.int64),
        )
    perm = rng.permutation(len(view))
    chosen = view[perm]
    users = ds.users[chosen]
    positives = ds.items[chosen]
    negs = draw_negatives_batch(sampler, positives, cfg.negatives, rng)
    return users, positives, negs


def train(ds: InteractionDataset, cfg: TrainConfig) -> tuple[EmbeddingModel, list[float]]:
    """Fit embeddings to a dataset; returns the model and per-epoch mean losses.

    Each epoch independently resamples its interaction view (frequent
    items thinned), shuffles it, draws fresh negatives, and applies one
    sparse Adam step per surviving pair. An epoch whose view comes back
    empty is skipped with a warning and records a NaN in the trace. A
    non-finite epoch loss aborts training.
    """
    cfg.validate(ds.item_count)
    model = init_model(ds.user_count, ds.item_count, cfg.dim, cfg.seed)
    opt = AdamState.for_model(model)
    sampler = build_negative_sampler(ds.item_degree, cfg.neg_exponent)
    sub_cfg = SubsamplerConfig(threshold=cfg.subsample)

    trace: list[float] = []
    for epoch in range(cfg.epochs):
        users, positives, negs = _epoch_arrays(ds, cfg, sampler, sub_cfg, epoch)
        n = len(users)
        if n == 0:
            logger.warning("epoch %d: zero surviving interactions, skipped", epoch)
            trace.append(float("nan"))
            continue
        started = time.perf_counter()
        if cfg.workers <= 0:
            loss_sum, opt.t = _run_pairs(
                model.user_vectors,
                model.item_vectors,
                opt.m_user,
                opt.v_user,
                opt.m_item,
                opt.v_item,
                users,
                positives,
                negs,
                opt.t,
                cfg.learning_rate,
                cfg.regularization,
                ADAM_BETA1,
                ADAM_BETA2,
                ADAM_EPS,
            )
        else:
            loss_sum = _run_sharded(model, opt, users, positives, negs, cfg)
        mean_loss = loss_sum / n
        if not math.isfinite(mean_loss):
            raise NumericError(
                f"non-finite mean loss {mean_loss} at epoch {epoch} "
                f"({n} pairs, lr={cfg.learning_rate}, reg={cfg.regularization})"
            )
        trace.append(mean_loss)
        logger.debug(
            "epoch %d: %d pairs, mean loss %.6f, %.3fs", epoch, n, mean_loss, time.perf_counter() - started
        )
    return model, trace


def _run_sharded(
    model: EmbeddingModel,
    opt: AdamState,
    users: np.ndarray,
    positives: np.ndarray,
    negs: np.ndarray,
    cfg: TrainConfig,
) -> float:
    """Lock-free threaded epoch: shards share the matrices via the nogil
    kernel. Row collisions race benignly; results are not reproducible."""
    from concurrent.futures import ThreadPoolExecutor

    n = len(users)
    bounds = np.linspace(0, n, cfg.workers + 1).astype(np.int64)
    t_start = opt.t

    def run(w: int) -> float:
        lo, hi = bounds[w], bounds[w + 1]
        if lo == hi:
            return 0.0
        loss, _ = _run_pairs(
            model.user_vectors,
            model.item_vectors,
            opt.m_user,
            opt.v_user,
            opt.m_item,
            opt.v_item,
            users[lo:hi],
            positives[lo:hi],
            negs[lo:hi],
            t_start + int(lo),
            cfg.learning_rate,
            cfg.regularization,
            ADAM_BETA1,
            ADAM_BETA2,
            ADAM_EPS,
        )
        return loss

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        losses = list(pool.map(run, range(cfg.workers)))
    opt.t = t_start + n
    return float(sum(losses))


def export_embeddings(model: EmbeddingModel, path: str) -> None:
    """Write both matrices to the binary embedding file (float32)."""
    for name, matrix in (("user", model.user_vectors), ("item", model.item_vectors)):
        bad = np.argwhere(~np.isfinite(matrix))
        if len(bad):
            row, col = bad[0]
            raise NumericError(
                f"refusing to export non-finite {name} matrix "
                f"(first bad entry at row {row}, column {col})"
            )
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        write_u16(fh, EMBEDDING_VERSION)
        write_u32(fh, model.user_count)
        write_u32(fh, model.item_count)
        write_u32(fh, model.dim)
        write_matrix_f32(fh, model.user_vectors)
        write_matrix_f32(fh, model.item_vectors)


def import_embeddings(path: str) -> EmbeddingModel:
    """Read an embedding file back into a model.

    Matrices come back float64 with values exactly as stored, so a
    further export reproduces the file byte for byte.
    """
    with open(path, "rb") as fh:
        expect_magic(fh, EMBEDDING_MAGIC, "embedding")
        version = read_u16(fh, "embedding version")
        if version != EMBEDDING_VERSION:
            raise DataError(f"unsupported embedding version {version}")
        user_count = read_u32(fh, "user count")
        item_count = read_u32(fh, "item count")
        dim = read_u32(fh, "dimension")
        users = read_matrix_f32(fh, user_count, dim, "user matrix")
        items = read_matrix_f32(fh, item_count, dim, "item matrix")
        if fh.read(1):
            raise DataError("trailing bytes after embedding payload")
    for name, matrix in (("user", users), ("item", items)):
        bad = np.argwhere(~np.isfinite(matrix))
        if len(bad):
            row, col = bad[0]
            raise DataError(
                f"non-finite value in stored {name} matrix at row {row}, column {col}"
            )
    return EmbeddingModel(users.astype(np.float64), items.astype(np.float64))


def export_embeddings_text(
    model: EmbeddingModel,
    user_keys: Sequence[str],
    item_keys: Sequence[str],
    path: str,
    delimiter: str = " ",
) -> None:
    """Human-readable export: one row per entity, key then coordinates.

    All user rows come first, then all item rows, matching the binary
    layout.
    """
    if len(user_keys) != model.user_count or len(item_keys) != model.item_count:
        raise ConfigError("key lists must match the model's entity counts")
    with open(path, "w", encoding="utf-8") as fh:
        for keys, matrix in ((user_keys, model.user_vectors), (item_keys, model.item_vectors)):
            for key, row in zip(keys, matrix):
                coords = delimiter.join("%.8g" % v for v in row)
                fh.write(f"{key}{delimiter}{coords}\n")
