"""Choose channel/event counts on a grid, then weights by Latin hypercube."""
from pmgoal import PipelineConfig, WeightParams, synth_dataset
from pmgoal.tune import grid_search, lhs_sample, tune_weights

ds = synth_dataset(n_goals=3, traces_per_goal=6, n_features=10, regimes=3, noise=0.5, seed=3, n_informative=2)

grid = grid_search(ds, nf_range=range(1, 6), nc_range=(4, 6, 8), base=PipelineConfig())
for row in grid.table:
    print(f"N_f={row['n_f']:<2} N_c={row['n_c']:<2} F1={row['f1']:.3f}")
print("best cell:", grid.best_nf, grid.best_nc, round(grid.best_f1, 3))

candidates = [WeightParams()] + lhs_sample(30, seed=0)
weights = tune_weights(ds, candidates, grid.best_config)
print(f"default weights F1={weights.table[0]['f1']:.3f}; best LHS F1={weights.best_f1:.3f} with {weights.best_params}")
