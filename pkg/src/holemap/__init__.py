"""Exact kneading-theory invariants for piecewise-linear interval maps with a hole.

The pipeline, end to end:

    vmap   = validate_map(make_map(...))
    data   = kneading_data(vmap)
    km     = kneading_matrix(vmap, data)
    det    = kneading_determinant(km, vmap.n_laps)
    rfac   = r_polynomial(data, vmap)
    bundle = build_bundle(vmap, data)
    report = verify_identities(vmap, bundle, det, rfac)
    inv    = compute_invariants(vmap, bundle, det, rfac)

Every step up to `verify_identities` is exact (rationals and integer
polynomials); `compute_invariants` is the only numeric layer.
"""

__version__ = "1.0.0"

from .errors import (
    CombinatorialBlowup,
    DenominatorBlowup,
    EndpointNotFixed,
    GapNotHole,
    HoleMapError,
    ImageEscapesDomain,
    ImageNotInChain,
    InexactDivision,
    InsufficientData,
    MapDefinitionError,
    NoBracket,
    NoConvergence,
    NonExpandingLap,
    NonSquareKneadingMatrix,
    NotMarkov,
    OverlappingLaps,
    SpecFileError,
)
from .maps import (
    LEFT,
    RIGHT,
    HoleMap,
    Lap,
    SidedPoint,
    ValidatedMap,
    from_ifs,
    make_map,
    validate_map,
)
from .orbits import (
    Alphabet,
    Itinerary,
    KneadingData,
    OrbitRecord,
    itinerary,
    kneading_data,
    orbit,
)
from .weightring import WeightPoly, char_poly, det_bareiss
from .kneading import (
    KneadingMatrix,
    RationalFn,
    invariant_coordinate,
    kneading_determinant,
    kneading_increment,
    kneading_matrix,
    r_polynomial,
)
from .markov import (
    ChainData,
    MarkovPartition,
    MatrixBundle,
    VerificationReport,
    build_bundle,
    build_chain,
    build_markov_partition,
    theta_similarity_check,
    transition_matrix,
    v_matrix,
    verify_identities,
    weighted_transition_matrix,
    zeta_function,
)
from .invariants import (
    InvariantReport,
    compute_invariants,
    hausdorff_dimension,
    escape_rate,
    topological_entropy,
    moran_dimension,
    pressure,
)
from .montecarlo import (
    SurvivalSeries,
    cylinder_dimension,
    estimate_escape_rate,
    simulate_survival,
)
