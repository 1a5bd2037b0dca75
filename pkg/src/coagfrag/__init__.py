"""coagfrag: simulation and statistical verification of coagulation and
fragmentation dualities for stable Poisson-Kingman mass partitions."""

__version__ = "0.1.0"

from .errors import CoagFragError, ConfigError, DomainError, NumericError, StatisticalFailure
from .rng import SeedStream
from .specfun import (
    QuadratureConfig,
    StableIndex,
    gg_laplace_exponent,
    gg_levy_tail,
    gg_levy_tail_inverse,
    stable_density,
)
from .partitions import (
    Bridge,
    IntervalPartition,
    MassPartition,
    SetPartition,
    SimpleBridge,
    bridge_from_mass,
    diversity_estimate,
    eppf_pd,
    interval_partition,
    paintbox_partition,
    set_partitions,
    simple_bridge_labels,
)
from .samplers import (
    JumpSeries,
    ZetaSpec,
    sample_dgm_s1,
    sample_gg_jumps,
    sample_pa_zeta,
    sample_pd_conditional,
    sample_pd_stickbreak,
    sample_stable,
    sample_tilted_stable,
    sample_zeta,
    size_biased_pick,
)
from .operators import (
    FragConfig,
    JointCoagSample,
    coag_composed,
    coag_interval,
    coag_simple,
    frag_dgm,
    frag_pitman,
    structural_sample,
    three_step_partition,
)
from .duality import (
    DIAGRAMS,
    DualityReport,
    Statistic,
    TestReport,
    check_conditional_coag,
    check_conditional_independence,
    check_laplace_identity,
    check_vershik_moment,
    run_duality,
)

__all__ = [name for name in dir() if not name.startswith("_")]
