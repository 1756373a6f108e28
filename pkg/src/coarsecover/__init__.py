"""coarsecover: large-scale geometry of coverings and groups.

Chain metrics of admissible coverings, word-metric growth and
hyperbolicity of finitely generated groups, quasi-isometry obstruction
reports, and decomposition-space norms built from bounded admissible
partitions of unity.
"""

from . import coverings, decomposition, embeddings, groups, invariants
from .coverings import (
    DyadicAnnuli,
    ExplicitFinite,
    GroupTranslates,
    HeisenbergCubes,
    NerveGraph,
    UniformGrid,
    as_point,
    build_nerve,
    chain_distance,
    is_concatenation,
    net_distance_matrix,
    nerve_growth_profile,
)
from .decomposition import (
    Bapu,
    SampledFunction,
    besov_norm,
    build_bapu,
    clustering_map,
    decomposition_norm,
    local_norm,
    modulation_norm,
    sl2_l1_norm,
    stft,
)
from .embeddings import (
    adapted_support,
    dyadic_power_embedding,
    fit_qi_parameters,
    geometric_condition_check,
    induced_index_map,
    tensor_embedding,
)
from .groups import (
    DiscreteHeisenberg,
    EngelLattice,
    FreeAbelian,
    FreeGroup,
    GeneratingSet,
    SL2Z,
    ball,
    distance_matrix,
    growth_function,
    word_distance,
)
from .invariants import (
    bass_guivarch,
    box_multiplicity_probe,
    classify_growth,
    coarse_connected,
    four_point_delta,
    homogeneous_dimension,
    hyperbolicity_trend,
    qi_obstruction_report,
)
from .profiles import GrowthProfile, HyperbolicityProfile

__version__ = "0.1.0"
