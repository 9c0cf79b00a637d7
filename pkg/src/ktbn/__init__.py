"""Bounded-treewidth Bayesian network learning, inference, and imputation.

The package is organized as a small numpy/scipy library:

- dataset: categorical data tables, CSV I/O, counting, missingness
- scoring: BIC family scores and parent-set caches
- ktree: incremental k-trees, moral graphs, exact treewidth
- exactlearn: exact structure optimization over small variable subsets
- learners: anytime bounded-treewidth structure search
- inference: junction-tree marginals, evidence probability, and MPE
- sem: structural EM with hard-EM completion of missing data
- bench: synthetic generators, evaluation metrics, benchmark harness
- netio: self-describing network files
- cli: command-line front end over the above
"""

from .dataset import (
    MISSING,
    CategoricalDataset,
    ContingencyTable,
    counts,
    inject_mcar,
    load_csv,
    save_csv,
)
from .scoring import (
    CacheEntry,
    FamilyScore,
    ParentSetCache,
    bic_family,
    bic_star,
    build_cache,
    prune_dominated,
)
from .ktree import (
    Dag,
    KTree,
    UGraph,
    add_node,
    exact_treewidth,
    feasible_parent_sets,
    init_ktree,
    is_moral_subgraph,
    moral_graph,
)
from .exactlearn import brute_force_btw_opt, exact_learn
from .learners import (
    LearnResult,
    LearnerConfig,
    derive_seed,
    kgreedy_iteration,
    kmax_init,
    kmax_iteration,
    learn,
    m_score,
)
from .inference import (
    BayesNet,
    JunctionTree,
    build_junction_tree,
    estimate_parameters,
    log_prob_evidence,
    marginal,
    mpe,
    prob_evidence,
)
from .sem import (
    SemConfig,
    SemResult,
    hard_em_complete,
    initial_chain,
    mode_impute,
    sem_run,
)
from .bench import (
    BenchReport,
    bench_compare,
    delta_bic_classify,
    generate_synthetic_net,
    imputation_accuracy,
    imputation_accuracy_micro,
    mae_eval,
    sample_from_network,
    testset_ll,
)
from .netio import load_network, save_network

__version__ = "0.1.0"
