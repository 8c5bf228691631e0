"""Spectral graph partitioning: an exact classical oracle and a simulated
quantum-phase-estimation pipeline on the graph Laplacian."""

from .errors import (
    ComponentSplitAdvised,
    DisconnectedGraph,
    GraphFormatError,
    NotNormalized,
    NotUnitary,
    OracleCapExceeded,
    PostSelectionStarved,
    QlapError,
    SelfLoopError,
    UnsupportedK,
)
from .evolution import EvolutionBackend, exact_propagator, trotter_propagator_apply
from .graph import (
    Graph,
    LaplacianMatrix,
    Partition,
    build_laplacian,
    connected_components,
    cut_size,
    normalize_laplacian,
    pad_to_power_of_two,
    parse_edge_list,
    read_graph,
)
from .qpe import (
    EigHistogram,
    QpeConfig,
    ReadoutResult,
    StatePrep,
    count_zero_degeneracy,
    eigenvalue_histogram,
    prepare_state,
    qpe_run,
    quantum_fiedler_partition,
    readout_eigenvector,
    recover_signs,
)
from .qsim import QuantumState, RngStream
from .resources import ResourceEstimate, estimate_resources
from .spectral import SpectralResult, eig_sym, fiedler, recursive_bisect, sign_bisect

__version__ = "0.1.0"
