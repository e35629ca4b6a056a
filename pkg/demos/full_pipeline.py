"""The whole command-line pipeline on a benchmark-shaped corpus.

Writes a raw interaction file sized like a small public ratings corpus
(1508 users, 2071 items, 35494 interactions), then drives the CLI:
ingest -> tune (a compact grid) -> evaluate the winner on the test set.
Runs in a few minutes; every artifact lands in ./pipeline_demo/.
"""

import pathlib
import sys

from coembed.cli import main
from coembed.synthetic import exact_corpus_rows, write_interaction_file

work = pathlib.Path("pipeline_demo")
work.mkdir(exist_ok=True)
csv = work / "interactions.csv"
snap = work / "corpus.snap"

write_interaction_file(exact_corpus_rows(), str(csv), header=True)
print(f"wrote {csv}")

steps = [
    ["ingest", "--input", str(csv), "--output", str(snap), "--header",
     "--user-col", "user", "--item-col", "item", "--rating-col", "rating",
     "--stats-out", str(work / "stats.tsv")],
    # compact grid: one dimensionality, both negative-sampling exponents that
    # matter on clustered data, a handful of strategy cells
    ["tune", "--snapshot", str(snap),
     "--grid-dims", "100", "--grid-negatives", "5",
     "--grid-exponents=-1.0,-0.5",  # '=' form: a bare -1.0,... parses as a flag
     "--grid-user-weights", "0.5,0.75", "--grid-item-weights", "0.25,0.5",
     "--grid-consumers", "10,all", "--grid-depths", "30",
     "--grid-method-weight-flags", "false", "--grid-rank-weight-flags", "true,false",
     "--learning-rate", "0.025", "--subsample", "1e-3", "--regularization", "0.01",
     "--results-out", str(work / "grid.tsv"), "--best-out", str(work / "best.cfg")],
]
for argv in steps:
    print(f"\n$ coembed {' '.join(argv)}")
    rc = main(argv)
    if rc != 0:
        sys.exit(rc)

best = (work / "best.cfg").read_text()
print(f"\nbest configuration found:\n{best}")

train_flags = ["--learning-rate", "0.025", "--subsample", "1e-3",
               "--regularization", "0.01"]
strategy_flags = []
for line in best.strip().splitlines():
    key, _, value = line.partition(" = ")
    if key in ("strategy", "top-consumers", "depth", "user-weight", "item-weight"):
        strategy_flags += [f"--{key}", value]
    elif key in ("use-method-weights", "use-rank-weights") and value == "yes":
        strategy_flags.append(f"--{key}")
    elif key == "dim":
        train_flags += ["--dim", value]
    elif key == "negatives":
        train_flags += ["--negatives", value]
    elif key == "neg-exponent":
        train_flags += ["--neg-exponent", value]

final = [
    ["train", "--snapshot", str(snap), "--output", str(work / "final.emb"),
     "--seed", "0", *train_flags],
    ["evaluate", "--snapshot", str(snap), "--embeddings", str(work / "final.emb"),
     "--split-seed", "0", "--eval-set", "test", *strategy_flags,
     "--report-out", str(work / "test_report.tsv")],
]
for argv in final:
    print(f"\n$ coembed {' '.join(argv)}")
    rc = main(argv)
    if rc != 0:
        sys.exit(rc)

for line in (work / "test_report.tsv").read_text().splitlines():
    if line.startswith(("eval_set", "strategy", "15\t")):
        print(line)
print(f"\nall artifacts in {work}/")
