"""dsgdsim: consensus-based decentralized stochastic optimization, simulated.

Builds communication topologies and doubly stochastic mixing matrices, runs
decentralized and centralized (sub)gradient methods over them with seeded
Monte Carlo replication, and measures how long the decentralized method needs
before it matches the centralized baseline with the same gradient budget.
"""

__version__ = "0.1.0"

from .algorithms import (  # noqa: F401
    ALGORITHMS,
    CentralState,
    DivergenceError,
    IterateBlock,
    Schedule,
    centralized_subgradient_step,
    consensus_step,
    constant,
    dsgd_step,
    inv,
    inv_sqrt,
    mu_inv,
    run,
    sgd_step,
    subgradient_step,
)
from .graphs import (  # noqa: F401
    Graph,
    build_complete,
    build_erdos_renyi,
    build_grid,
    build_path,
    build_ring,
    build_star,
    build_tree_random,
    degree,
    is_connected,
)
from .metrics import (  # noqa: F401
    AggregateTrace,
    RunTrace,
    aggregate,
    central_error,
    consensus_error,
    median_stop_time,
    metric_grid,
    optimization_error,
    running_average_update,
    transient_time,
)
from .mixing import (  # noqa: F401
    MixingMatrix,
    from_matrix,
    lazy_metropolis,
    metropolis,
    mix,
    spectral_lambda,
    validate,
)
from .objectives import (  # noqa: F401
    Objective,
    RidgeParams,
    make_ridge_params,
    median_objective,
    quadratic_objective,
    ridge_objective,
    ridge_optimum,
)
