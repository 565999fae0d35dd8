"""Pick representative sensor channels.

Correlated channels are grouped by agglomerative clustering on 1 - |r|
and each group is represented by its medoid channel.
"""
import numpy as np

from pmgoal import correlation_matrix, fit_selection, synth_dataset
from pmgoal.featsel import clusters_from_tree

ds = synth_dataset(n_goals=2, traces_per_goal=5, n_features=12, regimes=3, noise=0.3, seed=0)
rows = ds.all_rows()
corr = correlation_matrix(rows)
print(f"{rows.shape[0]} pooled rows, {rows.shape[1]} channels")
print("mean |r| off the diagonal:", round(float(corr[~np.eye(12, dtype=bool)].mean()), 3))

sel = fit_selection(rows, n_f=4)
for members, medoid in zip(sel.clusters, sel.selected):
    print(f"cluster {[ds.feature_names[i] for i in members]} -> keep {ds.feature_names[medoid]}")

# the merge tree is kept, so coarser cuts need no refit
print("two groups:", clusters_from_tree(12, sel.merge_tree, 2))
