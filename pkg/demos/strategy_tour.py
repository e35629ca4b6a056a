"""Compare all five ranking strategies on one trained model.

Trains once on a clustered corpus, then scores the held-out validation
set with each strategy, including the voting ensemble with and without
rank discounts.
"""

from coembed.data import InteractionDataset, split_dataset
from coembed.evaluate import EvalCache, evaluate
from coembed.model import TrainConfig, train
from coembed.recommend import StrategyConfig
from coembed.synthetic import exact_corpus_rows

rows = exact_corpus_rows(n_users=600, n_items=800, n_interactions=14000,
                         clusters=30, seed=5)
ds = InteractionDataset.from_keyed_pairs([(u, i) for u, i, _ in rows])
split = split_dataset(ds, (0.8, 0.1, 0.1), seed=0)
print(f"corpus: {ds.user_count} users, {ds.item_count} items, "
      f"{ds.interaction_count} interactions")

cfg = TrainConfig(dim=64, learning_rate=0.025, epochs=50, subsample=1e-3,
                  negatives=5, neg_exponent=-0.5, regularization=0.01, seed=0)
model, _ = train(split.train, cfg)

cache = EvalCache(split, model)
strategies = [
    ("direct user-to-item cosine", StrategyConfig(kind="user_item", top_n=15)),
    ("mean cosine to history", StrategyConfig(kind="item_item", top_n=15)),
    ("blend 0.75/0.25", StrategyConfig(kind="weighted", top_n=15,
                                       user_weight=0.75, item_weight=0.25)),
    ("consumer-augmented items", StrategyConfig(kind="combined", top_n=15,
                                                top_consumers=10)),
    ("ensemble, plain votes", StrategyConfig(kind="ensemble", top_n=15, depth=30,
                                             user_weight=0.75, item_weight=0.25,
                                             top_consumers=10)),
    ("ensemble, rank-discounted", StrategyConfig(kind="ensemble", top_n=15, depth=30,
                                                 user_weight=0.75, item_weight=0.25,
                                                 top_consumers=10,
                                                 use_rank_weights=True)),
]
print(f"{'strategy':28s} {'NDCG@15':>8s} {'F1@15':>7s} {'recall@15':>9s}")
for label, strategy in strategies:
    report = evaluate(split, model, strategy, cache=cache)
    print(f"{label:28s} {report.at('ndcg', 15):8.4f} {report.at('f1', 15):7.4f} "
          f"{report.at('recall', 15):9.4f}")
