"""Reflection-coefficient design for absorptive reconfigurable surfaces.

Library layout:

* :mod:`aris_opt.core` -- value types and elementary constructions.
* :mod:`aris_opt.channels` -- Rayleigh and clustered-arrival channel draws.
* :mod:`aris_opt.solvers` -- projected-gradient and interior-point kernels.
* :mod:`aris_opt.radarcomm` -- interference-channel norm minimization.
* :mod:`aris_opt.d2d` -- worst-link SINR maximization for D2D pairs.
* :mod:`aris_opt.pls` -- secrecy-rate maximization with optional jammer.
* :mod:`aris_opt.harness` -- seeded Monte-Carlo sweeps, CSV/SVG output.
* :mod:`aris_opt.cli` -- the ``aris-opt`` command.
"""

from .core import (DimensionMismatch, ReflectionVector, RisMode, db_to_linear,
                   linear_to_db, make_diag_channel, steering_vector, vectorize)
from .channels import MmwParams, mmw_matrix, rayleigh_matrix, stream
from .solvers import (ConvergenceError, GpResult, SdpInfeasibleError, SdpProblem,
                      SdrMatrix, SolverOptions, TraceConstraint, solve_disk_ls,
                      solve_sdp, solve_unit_modulus_gp)
from .radarcomm import (DesignResult, RadarCommInstance, build_ls_system, design_aris,
                        design_conventional, mean_modulus)
from .d2d import (D2DInstance, HomogenizedQuadratic, MaxMinOptions, MaxMinResult,
                  link_quadratic, maxmin_design, randomize_rank_one, sinr)
from .pls import (PlsInstance, PlsQuadratics, SecrecyOptions, SecrecyResult,
                  maximize_secrecy, relaxed_secrecy_objective, secrecy_quadratics,
                  secrecy_rate)
from .harness import (EXPERIMENTS, ExperimentConfig, SweepResult, run_experiment,
                      write_csv, write_plots)

__version__ = "0.1.0"
