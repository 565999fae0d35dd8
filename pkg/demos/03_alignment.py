"""Align an observed event sequence against two learnt goal models.

The two logs are small hand-built histories. The observation starts like
both goals but only the second model can follow it for long.
"""
from pmgoal import build_model, optimal_alignment
from pmgoal.running_example import LOG_T1, LOG_T2, TAU

models = {"T1": build_model(LOG_T1, goal="T1"), "T2": build_model(LOG_T2, goal="T2")}
print("observed:", " ".join(f"e{e}" for e in TAU))
for goal, model in models.items():
    a = optimal_alignment(TAU, model)
    print(f"\n{goal}: cost {a.total_cost:g}, {a.counts()}, trailing log moves {a.trailing_log_moves}")
    print(a.to_table())

dot = models["T2"].to_dot()
print(f"\nthe second model has {len(models['T2'].arcs)} arcs; its DOT source starts with:")
print("\n".join(dot.splitlines()[:4]))
