"""procmap: map iteration spaces onto processor grids.

The toolkit covers four layers:

* `procmap.spaces`    -- processor-space algebra (split / merge / swap /
                         slice / decompose) with index resolution back to
                         base (node, processor) coordinates.
* `procmap.factorize` -- the grid-factorization optimizer: exhaustive
                         enumeration via prime factorization, exact-rational
                         communication objectives, the greedy baseline, and
                         the AM-GM lower bound.
* `procmap.commvol`   -- closed-form boundary / halo / transpose volume
                         models and a brute-force counting oracle.
* `procmap.dsl`       -- the mapping DSL: parser, validator, evaluator.
* `procmap.tasksim`   -- a deterministic simulator of the task lifecycle
                         semantics plus an independent trace checker.

All core values are immutable and all operations are pure functions.
"""

from .commvol import (
    BlockGrid,
    HaloSpec,
    halo_volume,
    oracle_boundary_count,
    surface_volume,
    transpose_volume,
)
from .factorize import (
    AnisotropicHalo,
    Isotropic,
    WithTranspose,
    amgm_lower_bound,
    count_factorizations,
    enumerate_factorizations,
    greedy_grid,
    prime_factorize,
    score,
    search_optimal,
    workload_vector,
)
from .spaces import MachineShape, ProcSpace, machine_space

__version__ = "0.1.0"

__all__ = [
    "AnisotropicHalo",
    "BlockGrid",
    "HaloSpec",
    "Isotropic",
    "MachineShape",
    "ProcSpace",
    "WithTranspose",
    "amgm_lower_bound",
    "count_factorizations",
    "enumerate_factorizations",
    "greedy_grid",
    "halo_volume",
    "machine_space",
    "oracle_boundary_count",
    "prime_factorize",
    "score",
    "search_optimal",
    "surface_volume",
    "transpose_volume",
    "workload_vector",
    "__version__",
]
