"""Weierstrass-type functions, their harmonic extensions to the upper
half-space, and finite-scale experiments on slow points, stopping-time
Cantor sets and weak quasi-regularity."""

__version__ = "0.1.0"

from ._parallel import get_threads, set_threads
from .harmonic import (
    FieldHandle,
    HarmonicJet,
    KinkField,
    LinearField,
    PoissonField,
    SaddleField,
    ScaledField,
    SumField,
    WeierstrassField,
    check_functional_equations,
    check_representation_identity,
    evaluate_jets,
    field_jet,
    phi_extension_jet,
    weierstrass_eval,
)
from .lattice import (
    CarlesonBox,
    NadicCube,
    box_quadrature,
    descendants,
    face_average_gradient,
    face_average_gradients,
)
from .qr import (
    QRReport,
    SeminormEstimate,
    bloch_seminorm,
    hessian_lower_scan,
    jacobi_eigvalsh,
    weak_qr_ratio,
    weak_qr_sweep,
    zygmund_seminorm,
)
from .slow import (
    RayProfile,
    SlowScore,
    check_prop21,
    check_prop23,
    directional_divergence_survey,
    ray_profile,
    slow_score,
)
from .stopping import (
    CantorTree,
    DimBound,
    StoppingNode,
    angular_filter,
    calibrate_constant,
    cantor_build,
    check_disjointness,
    check_maximality,
    check_tree,
    cone_bound_check,
    hungerford_bound,
    makarov_bound,
    radius_recursion,
    stopping_family,
    verify_bounded_ray,
)
from .trig import (
    SeminormBundle,
    TrigPolynomial,
    check_condition_H,
    jet2,
    seminorm_bounds,
)
from .trig import evaluate as eval_phi
