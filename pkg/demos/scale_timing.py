"""Training cost versus interaction volume.

Times the trainer over growing slices of a uniform corpus and fits a
line: wall time should track the interaction count, since each epoch is
one pass over the kept pairs with constant work per pair.
"""

from coembed.evaluate import benchmark_scaling
from coembed.model import TrainConfig
from coembed.synthetic import uniform_dataset

ds = uniform_dataset(n_users=2000, n_items=1500, n_interactions=60000, seed=3)
cfg = TrainConfig(dim=32, learning_rate=0.025, epochs=5, subsample=1e-2,
                  negatives=5, regularization=0.01, seed=0)

report = benchmark_scaling(ds, cfg, fractions=(0.25, 0.5, 0.75, 1.0),
                           repetitions=3, seed=0)
print(f"{'fraction':>8s} {'pairs':>7s} {'mean s':>8s} {'std s':>7s}")
for row in report.rows:
    print(f"{row.fraction:8.2f} {row.interactions:7d} {row.mean_seconds:8.3f} "
          f"{row.std_seconds:7.3f}")
print(f"\nleast-squares fit: {report.slope:.3e} s/pair, "
      f"intercept {report.intercept:.3f} s, R^2 = {report.r_squared:.4f}")
