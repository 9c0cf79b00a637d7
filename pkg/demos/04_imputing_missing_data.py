"""Imputing missing values with structural EM.

Hide a fraction of the cells completely at random, then alternate:
complete the data with the current network (hard assignments via the
most probable explanation), relearn structure and parameters from the
completed data, repeat. The learned joint distribution restores hidden
cells far better than per-column modes once variables are correlated.

Run: python3 demos/04_imputing_missing_data.py
"""

import numpy as np

from ktbn import (
    SemConfig,
    generate_synthetic_net,
    imputation_accuracy,
    inject_mcar,
    mode_impute,
    sample_from_network,
    sem_run,
)

truth_net = generate_synthetic_net(n=20, k_true=3, max_arity=3, rng=10)
truth = sample_from_network(truth_net, d=1500, rng=11)

print(f"{'rate':>5} {'mode':>8} {'sem':>8} {'gain':>8}")
for rate in (0.05, 0.10, 0.20):
    degraded, mask = inject_mcar(truth, rate, seed=0)
    res = sem_run(degraded, SemConfig(k=4, t=0.3, mode="joint", seed=0,
                                      max_sem_iterations=3))
    acc_sem = imputation_accuracy(truth, res.imputed, mask)
    acc_mode = imputation_accuracy(truth, mode_impute(degraded), mask)
    print(f"{rate:>5.0%} {acc_mode:>8.4f} {acc_sem:>8.4f} "
          f"{(acc_sem - acc_mode) * 100:>+7.2f}pp")

# The loop reports its trajectory: completions stabilize quickly.
degraded, mask = inject_mcar(truth, 0.10, seed=3)
res = sem_run(degraded, SemConfig(k=4, t=0.3, seed=1, max_sem_iterations=6))
print(f"\nEM iterations: {res.iterations}, converged: {res.converged}")
print(f"scores per relearning pass: {[round(s, 1) for s in res.per_iteration_scores]}")

# "joint" completes whole rows with one most-probable-explanation query;
# "independent" fills each hole from its own posterior marginal.
indep = sem_run(degraded, SemConfig(k=4, t=0.3, seed=1, mode="independent",
                                    max_sem_iterations=6))
joint_acc = imputation_accuracy(truth, res.imputed, mask)
indep_acc = imputation_accuracy(truth, indep.imputed, mask)
print(f"\njoint completion accuracy:       {joint_acc:.4f}")
print(f"independent completion accuracy: {indep_acc:.4f}")
