"""Synthetic interaction generators for tests, demos, and benchmarks.

Three shapes: a two-community dataset with a known planted structure, a
power-law catalog with clustered tastes sized like a small public
ratings corpus, and a flat uniform generator for timing runs.
"""

from __future__ import annotations

import numpy as np

from ._rng import seeded_rng
from .data import InteractionDataset
from .errors import ConfigError


def two_block_dataset(block_users: int = 20, block_items: int = 20,
                      per_user: int = 10, blocks: int = 2,
                      seed: int = 7) -> InteractionDataset:
    """Disjoint user/item communities with no cross-block interactions.

    Every user consumes ``per_user`` distinct items from their own block
    only, so block membership is fully recoverable from co-consumption.
    Each item is seeded with at least one consumer before the remaining
    picks are drawn, keeping every degree positive.
    """
    if per_user > block_items:
        raise ConfigError("per_user cannot exceed block_items")
    rng = seeded_rng(seed, 0, 0)
    pairs: list[tuple[str, str]] = []
    for b in range(blocks):
        ukeys = [f"b{b}_u{k}" for k in range(block_users)]
        ikeys = [f"b{b}_i{k}" for k in range(block_items)]
        chosen = [set() for _ in range(block_users)]
        # coverage pass: each item lands on one random user
        owners = rng.integers(0, block_users, size=block_items)
        for item, owner in enumerate(owners):
            if len(chosen[owner]) < per_user:
                chosen[owner].add(item)
        for u in range(block_users):
            while len(chosen[u]) < per_user:
                chosen[u].add(int(rng.integers(0, block_items)))
        for u in range(block_users):
            for item in sorted(chosen[u]):
                pairs.append((ukeys[u], ikeys[item]))
    return InteractionDataset.from_keyed_pairs(pairs)


def uniform_dataset(n_users: int, n_items: int, n_interactions: int,
                    seed: int = 0) -> InteractionDataset:
    """Uniformly random distinct pairs, sized for scaling benchmarks."""
    if n_interactions > n_users * n_items:
        raise ConfigError("more interactions requested than distinct pairs exist")
    rng = seeded_rng(seed, 0, 0)
    seen: set[int] = set()
    # draw in batches, keyed as u * n_items + i for cheap dedup
    while len(seen) < n_interactions:
        need = n_interactions - len(seen)
        us = rng.integers(0, n_users, size=2 * need + 16)
        its = rng.integers(0, n_items, size=2 * need + 16)
        for code in us * n_items + its:
            seen.add(int(code))
            if len(seen) == n_interactions:
                break
    pairs = [(f"u{code // n_items}", f"i{code % n_items}") for code in sorted(seen)]
    return InteractionDataset.from_keyed_pairs(pairs)


def clustered_interactions(n_users: int = 1630, n_items: int = 2400,
                           target: int = 38000, clusters: int = 12,
                           seed: int = 11) -> list[tuple[str, str, float]]:
    """Raw (user, item, rating) rows shaped like a small ratings corpus.

    Item popularity follows a power law, items belong to latent clusters,
    and each user mixes a few preferred clusters with globally popular
    picks. Returned rows are unique pairs in a stable order, suitable for
    writing to a delimited file and running through the ingest pipeline;
    degree-1 entities are left in on purpose so cleanup has work to do.
    """
    rng = seeded_rng(seed, 0, 0)

    cluster_of = rng.integers(0, clusters, size=n_items)
    # global popularity: zipf-ish with a flattened tail
    ranks = rng.permutation(n_items) + 1
    popularity = ranks.astype(np.float64) ** -0.85
    popularity /= popularity.sum()

    per_cluster: list[np.ndarray] = []
    per_cluster_p: list[np.ndarray] = []
    for c in range(clusters):
        members = np.nonzero(cluster_of == c)[0]
        w = popularity[members]
        per_cluster.append(members)
        per_cluster_p.append(w / w.sum())

    # user activity: lognormal, clipped, scaled to the target volume
    raw_activity = rng.lognormal(mean=2.5, sigma=1.1, size=n_users)
    raw_activity = np.clip(raw_activity, 2, 400)
    activity = np.maximum(2, np.round(raw_activity * (target / raw_activity.sum())).astype(int))

    rows: list[tuple[str, str, float]] = []
    for u in range(n_users):
        n_taste = int(rng.integers(1, 4))
        taste = rng.choice(clusters, size=n_taste, replace=False)
        mix = rng.dirichlet(np.full(n_taste, 0.8))
        quota = int(activity[u])
        picked: set[int] = set()
        attempts = 0
        while len(picked) < quota and attempts < 30 * quota:
            attempts += 1
            if rng.random() < 0.35:
                item = int(rng.choice(n_items, p=popularity))
            else:
                c = int(taste[rng.choice(n_taste, p=mix)])
                members = per_cluster[c]
                if len(members) == 0:
                    continue
                item = int(rng.choice(members, p=per_cluster_p[c]))
            picked.add(item)
        base_quality = 2.5 + 1.5 * (popularity[list(picked)] / popularity.max()) ** 0.3
        noise = rng.normal(0, 0.35, size=len(picked))
        for item, q, eps in zip(sorted(picked), base_quality, noise):
            rating = float(np.clip(np.round((q + eps) * 2) / 2, 0.5, 4.0))
            rows.append((f"u{u:05d}", f"m{item:05d}", rating))
    return rows


def exact_corpus_rows(n_users: int = 1508, n_items: int = 2071,
                      n_interactions: int = 35494, clusters: int = 80,
                      popularity_exponent: float = 1.2, focus: float = 0.99,
                      seed: int = 17) -> list[tuple[str, str, float]]:
    """Clustered power-law corpus with every count hit exactly.

    Unlike :func:`clustered_interactions`, the returned rows contain
    exactly ``n_users`` distinct users, ``n_items`` distinct items, and
    ``n_interactions`` unique pairs, with every user and item degree at
    least two, so the standard cleanup pass keeps the shape intact.
    Items split into ``clusters`` taste pools, each with its own
    rank**-popularity_exponent ladder; a user draws from their own pool
    with probability ``focus`` and from the global mix otherwise. A
    repair pass swaps pairs onto starved items without disturbing user
    degrees or the total.
    """
    if n_interactions < 2 * max(n_users, n_items):
        raise ConfigError("need at least two interactions per user and per item")
    if n_interactions > n_users * n_items:
        raise ConfigError("more interactions requested than distinct pairs exist")
    if not 0.0 <= focus <= 1.0:
        raise ConfigError(f"focus must lie in [0, 1], got {focus}")
    rng = seeded_rng(seed, 0, 0)

    # user degrees: lognormal, clipped, nudged to the exact total
    raw = np.clip(rng.lognormal(2.9, 0.6, n_users), 2, 110)
    degrees = np.maximum(2, np.round(raw * (n_interactions / raw.sum()))).astype(np.int64)
    degrees = np.minimum(degrees, n_items)
    gap = n_interactions - int(degrees.sum())
    while gap != 0:
        u = int(rng.integers(n_users))
        if gap > 0 and degrees[u] < n_items:
            degrees[u] += 1
            gap -= 1
        elif gap < 0 and degrees[u] > 2:
            degrees[u] -= 1
            gap += 1

    # every cluster owns a contiguous-ish random slice of the catalog and
    # ranks its members on its own popularity ladder
    item_cluster = rng.integers(0, clusters, size=n_items)
    members = [np.nonzero(item_cluster == c)[0] for c in range(clusters)]
    popularity = np.zeros(n_items)
    for c in range(clusters):
        pool = members[c]
        if len(pool) == 0:
            continue
        order = rng.permutation(len(pool))
        within = (np.argsort(order) + 1).astype(np.float64) ** -popularity_exponent
        popularity[pool] = within
    global_p = popularity / popularity.sum()
    pool_p = [popularity[m] / popularity[m].sum() if len(m) else None for m in members]

    user_cluster = rng.integers(0, clusters, size=n_users)
    consumed: list[set[int]] = []
    for u in range(n_users):
        quota = int(degrees[u])
        pool = members[int(user_cluster[u])]
        picked: set[int] = set()
        attempts = 0
        while len(picked) < quota and attempts < 60 * quota:
            attempts += 1
            if len(pool) and rng.random() < focus:
                item = int(rng.choice(pool, p=pool_p[int(user_cluster[u])]))
            else:
                item = int(rng.choice(n_items, p=global_p))
            picked.add(item)
        # dense users can exhaust their pool; top up from the global mix
        while len(picked) < quota:
            item = int(rng.integers(n_items))
            picked.add(item)
        consumed.append(picked)

    # repair pass: move pairs from well-fed items onto starved ones
    item_degree = np.zeros(n_items, dtype=np.int64)
    for items in consumed:
        for i in items:
            item_degree[i] += 1
    starved = [i for i in range(n_items) if item_degree[i] < 2]
    order = rng.permutation(n_users)
    cursor = 0
    for i in starved:
        while item_degree[i] < 2:
            for _ in range(n_users):
                u = int(order[cursor % n_users])
                cursor += 1
                if i in consumed[u]:
                    continue
                donors = [j for j in consumed[u] if item_degree[j] > 2]
                if not donors:
                    continue
                j = max(donors, key=lambda d: item_degree[d])
                consumed[u].remove(j)
                consumed[u].add(i)
                item_degree[j] -= 1
                item_degree[i] += 1
                break
            else:
                raise ConfigError("could not satisfy the minimum item degree; "
                                  "lower n_items or raise n_interactions")

    rows: list[tuple[str, str, float]] = []
    for u in range(n_users):
        for i in sorted(consumed[u]):
            quality = 2.5 + 1.5 * (popularity[i] / popularity.max()) ** 0.3
            rating = float(np.clip(np.round((quality + rng.normal(0, 0.35)) * 2) / 2,
                                   0.5, 4.0))
            rows.append((f"u{u:04d}", f"m{i:04d}", rating))
    return rows


def write_interaction_file(rows: list[tuple[str, str, float]], path: str,
                           delimiter: str = ",", header: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(delimiter.join(("user", "item", "rating")) + "\n")
        for user, item, rating in rows:
            fh.write(f"{user}{delimiter}{item}{delimiter}{rating:g}\n")
