# slabforge package
from .errors import (
    SlabforgeError,
    MeshError,
    MotionRejected,
    RotationBoundError,
    ConformityError,
    BlockDerivationError,
    DivergenceError,
    ConfigError,
    FormatError,
    UnsupportedVersionError,
)
from .mesh_core import (
    Region,
    AnnulusTopology,
    SpatialMesh,
    ValidationReport,
    build_annulus_mesh,
    build_mixed_mesh,
    build_box_mesh,
    is_chainsaw,
    triangulate,
    validate_spatial_mesh,
)
from .motion import Box, MotionMap, advance_vertices, blend_weight
from .sliding import AnnulusState, MeshFamily, SwapDirection, SwapDecision, decide_swap, apply_swap, update_sliding_layer
from .prism import cut_prism, cuts_census
from .block_cuts import BlockSetCache, derive_block_connectivity, select_configuration, default_block_sets
from .extrude import SpaceTimeSlab, extrude_slab, validate_slab
from .rigid_body import DofParams, DofState, RigidBodyState, predictor, corrector, integrate_dof
from .forces import FluidParams, ForceMoment, BoundaryStressSample, compute_force_moment
from .providers import ForceProvider, build_provider
from .config import CouplingConfig, Settings, configure_logging, load_config, parse_config
from .coupling import staggered_step, run_simulation, initial_mesh
from .analysis import response_metrics, plot_time_series

__version__ = "0.1.0"

__all__ = [
    'SlabforgeError',
    'MeshError',
    'MotionRejected',
    'RotationBoundError',
    'ConformityError',
    'BlockDerivationError',
    'DivergenceError',
    'ConfigError',
    'FormatError',
    'UnsupportedVersionError',
    'Region',
    'AnnulusTopology',
    'SpatialMesh',
    'ValidationReport',
    'build_annulus_mesh',
    'build_mixed_mesh',
    'build_box_mesh',
    'is_chainsaw',
    'triangulate',
    'validate_spatial_mesh',
    'Box',
    'MotionMap',
    'advance_vertices',
    'blend_weight',
    'AnnulusState',
    'MeshFamily',
    'SwapDirection',
    'SwapDecision',
    'decide_swap',
    'apply_swap',
    'update_sliding_layer',
    'cut_prism',
    'cuts_census',
    'BlockSetCache',
    'derive_block_connectivity',
    'select_configuration',
    'default_block_sets',
    'SpaceTimeSlab',
    'extrude_slab',
    'validate_slab',
    'DofParams',
    'DofState',
    'RigidBodyState',
    'predictor',
    'corrector',
    'integrate_dof',
    'FluidParams',
    'ForceMoment',
    'BoundaryStressSample',
    'compute_force_moment',
    'ForceProvider',
    'build_provider',
    'CouplingConfig',
    'Settings',
    'configure_logging',
    'load_config',
    'parse_config',
    'staggered_step',
    'run_simulation',
    'initial_mesh',
    'response_metrics',
    'plot_time_series',
]
