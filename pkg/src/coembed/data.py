"""Interaction data: ingest, cleaning, splitting, stats, snapshots.

The pipeline goes raw delimited text -> RawInteractions -> preprocess ->
InteractionDataset (binary implicit feedback, compact integer ids) ->
split_dataset -> SplitDataset. Datasets are immutable once built; every
transformation returns a new object.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from ._binio import (
    expect_magic,
    read_str,
    read_u16,
    read_u32,
    read_u64,
    write_str,
    write_u16,
    write_u32,
    write_u64,
)
from ._rng import seeded_rng
from .errors import ConfigError, DataError, DatasetExhaustedError

logger = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"I2VD"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True, slots=True)
class InteractionRecord:
    """One parsed input row, prior to any cleaning."""

    user_key: str
    item_key: str
    rating: float | None = None
    kind: str | None = None
    timestamp: float | None = None


@dataclass(slots=True)
class RawInteractions:
    """Parsed rows in input order plus ingest bookkeeping."""

    records: list[InteractionRecord]
    lines_read: int
    lines_skipped: int
    columns: int


@dataclass(frozen=True, slots=True)
class ColumnSpec:
    """How to read a delimited interaction file.

    Columns may be integer positions or, when ``has_header`` is true,
    header names. ``user_col`` and ``item_col`` are mandatory; the rest
    are optional.
    """

    delimiter: str = ","
    has_header: bool = False
    user_col: int | str = 0
    item_col: int | str = 1
    rating_col: int | str | None = None
    kind_col: int | str | None = None
    timestamp_col: int | str | None = None


@dataclass(frozen=True, slots=True)
class PreprocessRules:
    """Cleaning rules applied by :func:`preprocess`.

    Degree minima are enforced iteratively until a fixpoint: removing a
    weak item can push a user under threshold and vice versa.
    """

    binarize: bool = True
    interaction_kind: str | None = None
    min_user_degree: int = 2
    min_item_degree: int = 2


class InteractionDataset:
    """Immutable binary interaction set over compact integer ids.

    Invariants: every user id is in [0, user_count), every item id in
    [0, item_count), no (user, item) pair occurs twice, and the degree
    arrays agree with the pair list. Arrays are write-protected.
    """

    __slots__ = (
        "user_count",
        "item_count",
        "users",
        "items",
        "user_keys",
        "item_keys",
        "_key_to_user",
        "_key_to_item",
        "user_degree",
        "item_degree",
        "_user_offsets",
        "_user_item_lists",
        "_item_offsets",
        "_item_user_lists",
    )

    def __init__(
        self,
        users: np.ndarray,
        items: np.ndarray,
        user_keys: Sequence[str],
        item_keys: Sequence[str],
    ):
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        if users.shape != items.shape or users.ndim != 1:
            raise DataError("users and items must be equal-length 1-d arrays")
        if len(users) == 0:
            raise DatasetExhaustedError()
        self.user_count = len(user_keys)
        self.item_count = len(item_keys)
        if len(set(user_keys)) != self.user_count or len(set(item_keys)) != self.item_count:
            raise DataError("entity keys must be unique")
        if users.min() < 0 or users.max() >= self.user_count:
            raise DataError("user index out of range")
        if items.min() < 0 or items.max() >= self.item_count:
            raise DataError("item index out of range")
        combined = users * self.item_count + items
        if len(np.unique(combined)) != len(combined):
            raise DataError("duplicate (user, item) pair")

        self.users = users
        self.items = items
        self.user_keys = list(user_keys)
        self.item_keys = list(item_keys)
        self._key_to_user = {k: idx for idx, k in enumerate(self.user_keys)}
        self._key_to_item = {k: idx for idx, k in enumerate(self.item_keys)}
        self.user_degree = np.bincount(users, minlength=self.user_count).astype(np.int64)
        self.item_degree = np.bincount(items, minlength=self.item_count).astype(np.int64)

        # CSR-style adjacency for O(1) history lookups
        order = np.argsort(users, kind="stable")
        self._user_offsets = np.zeros(self.user_count + 1, dtype=np.int64)
        np.cumsum(self.user_degree, out=self._user_offsets[1:])
        self._user_item_lists = items[order]
        order = np.argsort(items, kind="stable")
        self._item_offsets = np.zeros(self.item_count + 1, dtype=np.int64)
        np.cumsum(self.item_degree, out=self._item_offsets[1:])
        self._item_user_lists = users[order]

        for arr in (
            self.users,
            self.items,
            self.user_degree,
            self.item_degree,
            self._user_offsets,
            self._user_item_lists,
            self._item_offsets,
            self._item_user_lists,
        ):
            arr.setflags(write=False)

    @property
    def interaction_count(self) -> int:
        return len(self.users)

    @property
    def sparsity(self) -> float:
        return 1.0 - self.interaction_count / (self.user_count * self.item_count)

    def user_history(self, u: int) -> np.ndarray:
        """Items consumed by user ``u`` (ascending item id)."""
        lo, hi = self._user_offsets[u], self._user_offsets[u + 1]
        return np.sort(self._user_item_lists[lo:hi])

    def item_consumers(self, i: int) -> np.ndarray:
        """Users who consumed item ``i`` (ascending user id)."""
        lo, hi = self._item_offsets[i], self._item_offsets[i + 1]
        return np.sort(self._item_user_lists[lo:hi])

    def user_index(self, key: str) -> int:
        try:
            return self._key_to_user[key]
        except KeyError:
            raise DataError(f"unknown user key: {key!r}") from None

    def item_index(self, key: str) -> int:
        try:
            return self._key_to_item[key]
        except KeyError:
            raise DataError(f"unknown item key: {key!r}") from None

    @classmethod
    def from_keyed_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "InteractionDataset":
        """Build a dataset from (user_key, item_key) pairs.

        Ids are assigned by first appearance; duplicate pairs collapse.
        No degree filtering is applied.
        """
        user_ids: dict[str, int] = {}
        item_ids: dict[str, int] = {}
        seen: set[tuple[int, int]] = set()
        users: list[int] = []
        items: list[int] = []
        for ukey, ikey in pairs:
            u = user_ids.setdefault(ukey, len(user_ids))
            i = item_ids.setdefault(ikey, len(item_ids))
            if (u, i) in seen:
                continue
            seen.add((u, i))
            users.append(u)
            items.append(i)
        if not users:
            raise DatasetExhaustedError()
        return cls(
            np.asarray(users, dtype=np.int64),
            np.asarray(items, dtype=np.int64),
            list(user_ids),
            list(item_ids),
        )


@dataclass(slots=True)
class SplitDataset:
    """Train partition plus held-out interaction lists.

    ``validation`` and ``test`` are (n, 2) integer arrays of (user, item)
    in the train partition's id space; rows whose user or item had no
    train interaction were pruned (counts recorded).
    """

    train: InteractionDataset
    validation: np.ndarray
    test: np.ndarray
    seed: int
    ratios: tuple[float, float, float]
    pruned_validation: int = 0
    pruned_test: int = 0

    def holdout(self, name: str) -> np.ndarray:
        if name == "validation":
            return self.validation
        if name == "test":
            return self.test
        raise ConfigError(f"unknown evaluation set {name!r} (expected validation or test)")


def _resolve_column(
    col: int | str | None, header: list[str] | None, n_columns: int, label: str
) -> int | None:
    if col is None:
        return None
    if isinstance(col, str):
        if header is None:
            raise ConfigError(f"{label} column given by name {col!r} but file has no header")
        try:
            return header.index(col)
        except ValueError:
            raise ConfigError(f"{label} column {col!r} not present in header {header}") from None
    idx = int(col)
    if idx < 0 or idx >= n_columns:
        raise ConfigError(f"{label} column index {idx} out of range for {n_columns} columns")
    return idx


def ingest_interactions(source: BinaryIO | str, spec: ColumnSpec) -> RawInteractions:
    """Parse delimited interaction text into records.

    ``source`` is a path or a binary stream. Blank and malformed lines
    are skipped with a warning count; a missing mandatory column (user
    or item) is a configuration error.
    """
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return ingest_interactions(fh, spec)

    text = io.TextIOWrapper(source, encoding="utf-8", newline="")
    reader = csv.reader(text, delimiter=spec.delimiter)

    header: list[str] | None = None
    records: list[InteractionRecord] = []
    lines_read = 0
    skipped = 0
    n_columns = 0
    resolved: tuple[int, int, int | None, int | None, int | None] | None = None

    for row in reader:
        lines_read += 1
        if header is None and spec.has_header:
            header = [c.strip() for c in row]
            n_columns = len(header)
            continue
        if not row or all(not c.strip() for c in row):
            skipped += 1
            continue
        if resolved is None:
            if n_columns == 0:
                n_columns = len(row)
            u_idx = _resolve_column(spec.user_col, header, n_columns, "user")
            i_idx = _resolve_column(spec.item_col, header, n_columns, "item")
            if u_idx is None or i_idx is None:
                raise ConfigError("user and item columns are mandatory")
            resolved = (
                u_idx,
                i_idx,
                _resolve_column(spec.rating_col, header, n_columns, "rating"),
                _resolve_column(spec.kind_col, header, n_columns, "kind"),
                _resolve_column(spec.timestamp_col, header, n_columns, "timestamp"),
            )
        u_idx, i_idx, r_idx, k_idx, t_idx = resolved
        needed = max(x for x in resolved if x is not None)
        if len(row) <= needed:
            skipped += 1
            continue
        user_key = row[u_idx].strip()
        item_key = row[i_idx].strip()
        if not user_key or not item_key:
            skipped += 1
            continue
        rating: float | None = None
        kind: str | None = None
        timestamp: float | None = None
        try:
            if r_idx is not None and row[r_idx].strip():
                rating = float(row[r_idx])
            if t_idx is not None and row[t_idx].strip():
                timestamp = float(row[t_idx])
        except ValueError:
            skipped += 1
            continue
        if k_idx is not None and row[k_idx].strip():
            kind = row[k_idx].strip()
        records.append(InteractionRecord(user_key, item_key, rating, kind, timestamp))

    if skipped:
        logger.warning("ingest: skipped %d of %d lines", skipped, lines_read)
    text.detach()
    return RawInteractions(records, lines_read, skipped, n_columns)


def _degree_fixpoint(
    pairs: list[tuple[str, str]], min_user: int, min_item: int
) -> list[tuple[str, str]]:
    """Repeatedly drop under-threshold users/items until stable."""
    current = pairs
    while True:
        u_deg: dict[str, int] = {}
        i_deg: dict[str, int] = {}
        for u, i in current:
            u_deg[u] = u_deg.get(u, 0) + 1
            i_deg[i] = i_deg.get(i, 0) + 1
        bad_users = {u for u, d in u_deg.items() if d < min_user}
        bad_items = {i for i, d in i_deg.items() if d < min_item}
        if not bad_users and not bad_items:
            return current
        current = [(u, i) for u, i in current if u not in bad_users and i not in bad_items]
        if not current:
            return current


def preprocess(raw: RawInteractions, rules: PreprocessRules = PreprocessRules()) -> InteractionDataset:
    """Clean raw records into a binary dataset.

    Steps, in order: keep only the selected interaction kind (if any),
    drop user-item pairs observed with more than one distinct rating,
    collapse duplicates, binarize, enforce degree minima to a fixpoint,
    compact ids by first appearance. An empty survivor set is fatal.
    """
    if not rules.binarize:
        raise ConfigError("only binarized (implicit) datasets are supported")
    if rules.min_user_degree < 0 or rules.min_item_degree < 0:
        raise ConfigError("degree minima must be non-negative")

    records = raw.records
    if rules.interaction_kind is not None:
        kinds = {r.kind for r in records if r.kind is not None}
        if rules.interaction_kind not in kinds:
            raise ConfigError(
                f"unknown interaction kind {rules.interaction_kind!r}; present: {sorted(kinds)}"
            )
        records = [r for r in records if r.kind == rules.interaction_kind]

    ratings_seen: dict[tuple[str, str], set[float]] = {}
    for r in records:
        if r.rating is not None:
            ratings_seen.setdefault((r.user_key, r.item_key), set()).add(r.rating)
    conflicted = {pair for pair, vals in ratings_seen.items() if len(vals) > 1}
    if conflicted:
        logger.warning("preprocess: removed %d pairs with conflicting ratings", len(conflicted))

    seen: set[tuple[str, str]] = set()
    pairs: list[tuple[str, str]] = []
    for r in records:
        pair = (r.user_key, r.item_key)
        if pair in conflicted or pair in seen:
            continue
        seen.add(pair)
        pairs.append(pair)

    before = len(pairs)
    pairs = _degree_fixpoint(pairs, rules.min_user_degree, rules.min_item_degree)
    if before != len(pairs):
        logger.info("preprocess: degree filter removed %d of %d pairs", before - len(pairs), before)
    if not pairs:
        raise DatasetExhaustedError()
    return InteractionDataset.from_keyed_pairs(pairs)


def _largest_remainder_sizes(n: int, ratios: Sequence[float]) -> list[int]:
    exact = [n * r for r in ratios]
    sizes = [int(np.floor(x)) for x in exact]
    short = n - sum(sizes)
    remainders = sorted(
        range(len(ratios)), key=lambda k: (-(exact[k] - sizes[k]), k)
    )
    for k in remainders[:short]:
        sizes[k] += 1
    return sizes


def split_dataset(
    ds: InteractionDataset,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> SplitDataset:
    """Random train/validation/test split over interactions.

    A seeded shuffle partitions interactions with largest-remainder
    rounding, then validation/test rows referencing a user or item with
    no train interaction are pruned. The train partition is re-compacted
    to its own id space and the held-out rows are remapped into it.
    """
    if len(ratios) != 3:
        raise ConfigError("split needs exactly three ratios")
    if any(r <= 0 for r in ratios):
        raise ConfigError(f"split ratios must be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must sum to 1, got {sum(ratios)}")

    rng = seeded_rng(seed, 2, 0)
    n = ds.interaction_count
    perm = rng.permutation(n)
    n_train, n_val, n_test = _largest_remainder_sizes(n, ratios)
    train_idx = perm[:n_train]
    val_idx = perm[n_train : n_train + n_val]
    test_idx = perm[n_train + n_val :]

    train_users = ds.users[train_idx]
    train_items = ds.items[train_idx]

    # re-compact the train id space (ascending original id keeps key order stable)
    kept_users = np.unique(train_users)
    kept_items = np.unique(train_items)
    user_map = np.full(ds.user_count, -1, dtype=np.int64)
    user_map[kept_users] = np.arange(len(kept_users))
    item_map = np.full(ds.item_count, -1, dtype=np.int64)
    item_map[kept_items] = np.arange(len(kept_items))

    train = InteractionDataset(
        user_map[train_users],
        item_map[train_items],
        [ds.user_keys[u] for u in kept_users],
        [ds.item_keys[i] for i in kept_items],
    )

    def _remap_holdout(idx: np.ndarray) -> tuple[np.ndarray, int]:
        us = user_map[ds.users[idx]]
        its = item_map[ds.items[idx]]
        ok = (us >= 0) & (its >= 0)
        kept = np.stack([us[ok], its[ok]], axis=1) if ok.any() else np.empty((0, 2), dtype=np.int64)
        return kept.astype(np.int64), int((~ok).sum())

    validation, pruned_val = _remap_holdout(val_idx)
    test, pruned_test = _remap_holdout(test_idx)
    if pruned_val or pruned_test:
        logger.info(
            "split: pruned %d validation and %d test rows referencing entities absent from train",
            pruned_val,
            pruned_test,
        )
    validation.setflags(write=False)
    test.setflags(write=False)
    return SplitDataset(train, validation, test, seed, tuple(ratios), pruned_val, pruned_test)


def dataset_stats(ds: InteractionDataset) -> dict:
    """Counts, sparsity, and the per-user consumption five-number summary."""
    per_user = ds.user_degree
    q = np.percentile(per_user, [0, 25, 50, 75, 100])
    return {
        "user_count": ds.user_count,
        "item_count": ds.item_count,
        "interaction_count": ds.interaction_count,
        "sparsity": ds.sparsity,
        "user_consumption": {
            "min": float(q[0]),
            "q1": float(q[1]),
            "median": float(q[2]),
            "q3": float(q[3]),
            "max": float(q[4]),
        },
    }


def save_snapshot(ds: InteractionDataset, path: str) -> None:
    """Write the dataset to its binary snapshot file."""
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        write_u16(fh, SNAPSHOT_VERSION)
        write_u32(fh, ds.user_count)
        write_u32(fh, ds.item_count)
        write_u64(fh, ds.interaction_count)
        pairs = np.empty((ds.interaction_count, 2), dtype="<u4")
        pairs[:, 0] = ds.users
        pairs[:, 1] = ds.items
        fh.write(pairs.tobytes())
        for keys in (ds.user_keys, ds.item_keys):
            write_u32(fh, len(keys))
            for key in keys:
                write_str(fh, key)


def load_snapshot(path: str) -> InteractionDataset:
    """Read a snapshot written by :func:`save_snapshot`, validating it."""
    with open(path, "rb") as fh:
        expect_magic(fh, SNAPSHOT_MAGIC, "dataset snapshot")
        version = read_u16(fh, "snapshot version")
        if version != SNAPSHOT_VERSION:
            raise DataError(f"unsupported snapshot version {version}")
        user_count = read_u32(fh, "user count")
        item_count = read_u32(fh, "item count")
        n = read_u64(fh, "interaction count")
        raw = fh.read(n * 8)
        if len(raw) != n * 8:
            raise DataError("truncated snapshot: interaction block short")
        pairs = np.frombuffer(raw, dtype="<u4").reshape(n, 2)
        tables: list[list[str]] = []
        for label in ("user", "item"):
            count = read_u32(fh, f"{label} key count")
            tables.append([read_str(fh, f"{label} key") for _ in range(count)])
        if fh.read(1):
            raise DataError("trailing bytes after snapshot payload")
    user_keys, item_keys = tables
    if len(user_keys) != user_count or len(item_keys) != item_count:
        raise DataError("snapshot key tables disagree with entity counts")
    return InteractionDataset(
        pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64), user_keys, item_keys
    )
