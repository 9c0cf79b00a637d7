"""Comparing learners on shared caches.

The harness runs every algorithm on every dataset, treewidth bound,
and seed, always from the same parent-set cache, and pairs each run
against the baseline (the first algorithm). Score differences are read
on the evidence scale: within 2 is a tie, beyond 10 is extreme.

Run: python3 demos/05_benchmarking.py
"""

from ktbn import (
    bench_compare,
    delta_bic_classify,
    generate_synthetic_net,
    mae_eval,
    sample_from_network,
    testset_ll,
)

datasets = []
for i in range(3):
    net = generate_synthetic_net(n=25, k_true=3, max_arity=3, rng=100 + i)
    datasets.append((f"synth{i}", sample_from_network(net, d=1500, rng=200 + i)))

report = bench_compare(
    datasets,
    algorithms=["kmax", "kgreedy"],
    ks=[3],
    time_budget=1.5,
    seeds=[0, 1],
)
print(report.describe())

print(f"\n{'dataset':<8} {'algorithm':<9} {'seed':>4} {'score':>12} {'vs baseline':>12}")
for row in report.runs:
    delta = row["delta_vs_baseline"]
    tag = f"{delta:+.1f}" if delta != "" else "baseline"
    print(f"{row['dataset']:<8} {row['algorithm']:<9} {row['seed']:>4} "
          f"{row['score']:>12.2f} {tag:>12}")

report.to_tsv("/tmp/demo_report.tsv")
report.to_long_tsv("/tmp/demo_report_long.tsv")
print("\nwrote /tmp/demo_report.tsv and /tmp/demo_report_long.tsv")

# The evidence scale in isolation.
print("\nevidence scale:")
for delta in (1.0, 4.0, 8.0, 30.0):
    print(f"  delta {delta:>5.1f}: {delta_bic_classify(delta)}")

# Model-quality metrics against a known ground truth.
truth = generate_synthetic_net(n=12, k_true=2, max_arity=2, rng=55)
train = sample_from_network(truth, d=2000, rng=56)
test = sample_from_network(truth, d=500, rng=57)

from ktbn import LearnerConfig, build_cache, estimate_parameters, learn

cache = build_cache(train, k=2)
res = learn(cache, LearnerConfig(k=2, max_iterations=60, seed=0), "kmax")
learned = estimate_parameters(train, res.dag, alpha=1.0, ktree=res.ktree)

print(f"\nheld-out loglik, truth:   {testset_ll(truth, test):.1f}")
print(f"held-out loglik, learned: {testset_ll(learned, test):.1f}")
print(f"mean absolute error on 50 evidence queries: "
      f"{mae_eval(truth, learned, q=50, rng=1):.4f}")
