"""Convergence-speed comparison across the activation family.

Trains the same MLP once per (activation, seed), averages the validation
curves, and reports the first epoch at which each run dips under 110% of
the ReLU run's best validation loss. Writes the three CSVs next to this
script under ./compare_out/.
"""

import os

from ashlab.harness import compare
from ashlab.harness.datasets import two_moons

ACTIVATIONS = ["relu", "swish", "ash", "l_ash", "f_ash_10", "f_ash_50", "f_ash_90"]
OUT = os.path.join(os.path.dirname(__file__), "compare_out")

data = two_moons(256, noise=0.1, seed=1)
results = compare.run_comparison(ACTIVATIONS, data, seeds=3, epochs=40)
paths = compare.write_comparison(OUT, results)

print("wrote:")
for p in paths.values():
    print(f"  {p}")

print("\nmean final validation loss:")
finals = {}
for run in results:
    if not run.failed:
        finals.setdefault(run.activation, []).append(run.records[-1].val_loss)
for name in ACTIVATIONS:
    mean = sum(finals[name]) / len(finals[name])
    print(f"  {name:>9}: {mean:.4f}")

print("\nepochs to the relative cut (per run):")
for row in compare.convergence_rows(results):
    print(f"  {row[0]:>9} seed {row[1]}: {row[4] if row[4] != '' else 'never'}")
