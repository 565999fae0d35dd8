"""End-to-end recognition on the six-trace running example.

Train on the six labelled traces (15 channels, 10 events), then score a
partially observed new trace that contains one off-pattern sample.
"""
from pmgoal import WeightParams, recognize, train_artifacts
from pmgoal.running_example import running_example_dataset, running_example_query

ds = running_example_dataset()
art = train_artifacts(ds, n_f=15, n_c=10, seed=0)
query = running_example_query()

for params in (WeightParams(), WeightParams(beta=0.05), WeightParams(lam=1.0, delta=0.0)):
    post = recognize(query, art, params)
    probs = ", ".join(f"{g}={p:.3g}" for g, p in post.probabilities.items())
    weights = ", ".join(f"{g}={w:.1f}" for g, w in post.weights.items())
    print(f"lam={params.lam:g} delta={params.delta:g} beta={params.beta:g}: weights {weights}; {probs}")
