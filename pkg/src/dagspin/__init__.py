"""Response-time analysis of parallel DAG tasks sharing spin locks under federated scheduling."""

from .fifo import (analyze_fifo, delta_cap, fifo_inter, fifo_interference, fifo_intra,
                   partition_fifo, wcrt_fifo)
from .framework import (
    AnalysisError,
    BlockingDecomposition,
    InfeasibleTaskError,
    InterferenceBound,
    Reason,
    Verdict,
    eta,
    federated_processors,
    graham_bound,
    interference_total,
    observed_interference,
)
from .model import (
    CycleError,
    DagTask,
    RequestPlacement,
    ResourceUsage,
    TaskSet,
    TaskSetError,
    Vertex,
    dump_taskset,
    load_taskset,
    longest_path,
    make_task,
    validate,
    volume,
)
from .priority import (
    PermutationCapError,
    PriorityContext,
    analyze_priority,
    dpr_fixpoint,
    partition_priority,
    priority_context,
    priority_inter,
    priority_intra,
    search_priority_assignment,
    var_delta,
    wcrt_priority,
)
from .simulator import (
    IdentityReport,
    Interval,
    SimTrace,
    TraceError,
    check_identities,
    decompose_blocking,
    extract_key_path,
    read_trace,
    replay_trace,
    simulate,
    write_trace,
)
from .unordered import (
    analyze_unordered,
    inter_bound_unordered,
    intra_bound_unordered,
    min_processors_unordered,
    partition_unordered,
    wcrt_unordered,
)
from .workload import (
    GenConfig,
    GenerationError,
    PlacementError,
    gen_dag,
    gen_taskset,
    load_openmp_dataset,
    openmp_taskset,
    place_all,
    place_requests,
)

__version__ = "0.1.0"
