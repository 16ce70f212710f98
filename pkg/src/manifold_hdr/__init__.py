"""Highest density region estimation on the sphere, flat tori and R^d.

The estimator keeps high-density sample points (kernel density >= lambda)
that have no low-density point within radius r_n, and returns the union of
closed r_n-balls around them.
"""

from .density import (
    IsotropicGaussian,
    KernelConfig,
    KernelDensity,
    Mixture,
    TorusVonMises,
    VonMisesFisher,
    bimodal_vmf_mixture,
    cv_select_concentration,
    default_parameter_grid,
    fit_kde,
    kde_evaluate,
    mixture_pdf,
    vmf_pdf,
    von_mises_torus_pdf,
)
from .grids import ConfigurationError, Grid, GridSpec, build_grid, grid_for
from .hdr import (
    EmptyEstimateWarning,
    HdrEstimate,
    LabeledSample,
    connected_components,
    estimate_hdr,
    estimate_hdr_by_probability,
    estimate_level,
    hdr_contains,
    plugin_hdr,
    split_sample,
    true_level,
)
from .manifolds import DomainError, Manifold, ManifoldPoint, geodesic_distance
from .morphology import (
    BallUnionSet,
    GridSet,
    closing,
    dilate,
    erode,
    hausdorff_distance,
    maximal_spacing,
    opening,
    packing_number,
    set_distance,
)
from .sampling import sample_mixture, sample_vmf, sample_von_mises_torus

__version__ = "0.1.0"
