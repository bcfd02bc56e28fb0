"""partlab: a desk-scale graph-partitioning laboratory.

Spectral sweep cuts, personal-pagerank and truncated-random-walk local
partitioning, exact expansion metrics with brute-force oracles, and
executable certificates for the expansion lower bounds with their explicit
constants.
"""

__version__ = "0.1.0"

from .errors import (ConvergenceError, GraphFormatError, GraphValidationError,
                     PreconditionError)
from .expansion import (ExpansionStats, SweepProfile, boundary_weight,
                        edge_expansion, graph_expansion_bruteforce,
                        k_way_expansion_bruteforce, robust_vertex_expansion,
                        set_stats, small_set_expansion_bruteforce,
                        sweep_profile)
from .graphs import (VertexSet, WeightedGraph, gen_complete, gen_cycle,
                     gen_dumbbell, gen_hypercube, gen_planted_partition,
                     load_graph, planted_part, save_graph)
from .pagerank import (PagerankVector, approximate_push, escape_mass_check,
                       exact_pagerank, pagerank_certificates,
                       pagerank_drop_check, pagerank_partition)
from .partitioner import (JumpingSequence, current_sweep, drop_lemma_check,
                          induction_step_check, jumping_sequence, lemma_jump_check,
                          sweep_cut, theorem_kway_certificate,
                          theorem_product_certificate)
from .powering import (PowerGraph, graph_power, improved_cheeger_sweep,
                       power_spectrum_check, reduction_checks,
                       sqrt_t_power_check)
from .reports import CertificateReport, REPORT_SCHEMA
from .spectral import (EigenPair, RestrictedSpectrum, apply_laplacian,
                       apply_lazy_walk, dense_spectrum, eigenpairs,
                       laplacian_solve, rayleigh_quotient,
                       restricted_eigenvalue)
from .walks import (WalkVector, exact_walk, local_eigen_partition,
                    rayleigh_bound_check, spectral_rounding,
                    spectral_sparsity_check, staying_probability_check,
                    truncated_quality_checks, truncated_walk, walk_partition)
