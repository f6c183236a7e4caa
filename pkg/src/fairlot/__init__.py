"""fairlot: exact-arithmetic toolkit for envy-free, Pareto-optimal
allocation lotteries over partition-based fair division instances."""

from .instance import (Instance, Lottery, Rational, StructuralError,
                       ValidationResult, expected_utility, expected_utility_matrix,
                       mix_lotteries, rat, rat_str, social_welfare, validate_lottery)
from .ratlp import (LinearProgram, LPOutcome, check_solution, solve,
                    solve_conditional_feasibility)
from .envy import (CyclicEnvyError, EnvyGraph, RhoEpsilon, WeightVector,
                   compute_rho, envy_graph, is_acyclic, synthesize_weights)
from .solver import (CapExceededError, InternalInconsistencyError,
                     NonconvergenceReport, ParetoFace, SolveReport, UtilityProfile,
                     enumerate_profiles, fixpoint_solve, hull_solve,
                     max_welfare_ef_po, meets_welfare_threshold, pareto_faces,
                     weighted_sum_lp)
from .verify import (EnvyPair, ParetoCertificate, verification_report, verify_ef,
                     verify_pareto, verify_threshold)
from .bvn import (BvnDecomposition, decompose, reconstruct, sample, sample_many,
                  sample_stream)
from .x3c import (InvalidCoverError, ReductionOutput, X3cInstance,
                  canonical_allocation, generate, is_exact_cover, witness_lottery)

__version__ = "0.1.0"
