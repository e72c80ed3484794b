"""Locality-weighted sparse coding on the probability simplex.

Exact Delaunay-based recovery oracles, an unrolled accelerated projected
gradient encoder, dictionary learning through it, and spectral clustering on
the resulting codes.
"""

from .clustering import (
    clustering_accuracy,
    kmeans,
    normalized_laplacian,
    similarity_graph,
    spectral_cluster,
    spectral_embed,
    symmetric_eigendecomposition,
)
from .datasets import (
    Dataset,
    GenerativeGroundTruth,
    gen_circle,
    gen_delaunay_model,
    gen_two_moons,
    load_dataset,
    load_idx,
    read_idx_images,
    read_idx_labels,
    save_dataset,
    write_idx,
)
from .encoder import (
    EncodeTrajectory,
    batch_encode,
    default_step_size,
    encode,
    lipschitz_constant,
    momentum_schedule,
)
from .geometry import (
    Landmarks,
    Triangulation,
    barycentric_coords,
    circumsphere,
    delaunay_triangulate,
    general_position_check,
    locate_cell,
)
from .kds import (
    TrainConfig,
    TrainReport,
    init_dictionary,
    loss_gradient_A,
    reconstruct,
    train,
)
from .oracle import (
    RecoveryResult,
    certify,
    solve_weighted_l0_exact,
    solve_weighted_l1_exact,
    verify_recovery,
)
from .simplex import (
    PenalizedLossParams,
    loss_gradient_x,
    penalized_loss,
    project_simplex,
    weighted_l0,
    weighted_l1,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "EncodeTrajectory",
    "GenerativeGroundTruth",
    "Landmarks",
    "PenalizedLossParams",
    "RecoveryResult",
    "TrainConfig",
    "TrainReport",
    "Triangulation",
    "barycentric_coords",
    "batch_encode",
    "certify",
    "circumsphere",
    "clustering_accuracy",
    "default_step_size",
    "delaunay_triangulate",
    "encode",
    "gen_circle",
    "gen_delaunay_model",
    "gen_two_moons",
    "general_position_check",
    "init_dictionary",
    "kmeans",
    "lipschitz_constant",
    "load_dataset",
    "load_idx",
    "locate_cell",
    "loss_gradient_A",
    "loss_gradient_x",
    "momentum_schedule",
    "normalized_laplacian",
    "penalized_loss",
    "project_simplex",
    "read_idx_images",
    "read_idx_labels",
    "reconstruct",
    "save_dataset",
    "similarity_graph",
    "solve_weighted_l0_exact",
    "solve_weighted_l1_exact",
    "spectral_cluster",
    "spectral_embed",
    "symmetric_eigendecomposition",
    "train",
    "verify_recovery",
    "weighted_l0",
    "weighted_l1",
    "write_idx",
]
