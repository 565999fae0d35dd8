"""Turn continuous rows into discrete events with seeded k-means."""
from pmgoal import discretize, fit_codebook, fit_selection, synth_dataset

ds = synth_dataset(n_goals=2, traces_per_goal=3, n_features=8, regimes=3, noise=0.2, seed=1)
sel = fit_selection(ds.all_rows(), n_f=3)
book = fit_codebook(ds.all_rows(), sel.selected, n_clusters=6, seed=0)
print("within-cluster sum of squares:", round(book.wcss, 3))
print("Lloyd history of the winning restart:", [round(w, 2) for w in book.wcss_history])

logs = discretize(ds, sel, book)
for goal, log in logs.items():
    for t in log:
        print(goal, t.trace_id, " ".join(f"e{e}" for e in t.events))
