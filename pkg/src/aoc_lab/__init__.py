"""aoc_lab: a computation-freshness laboratory.

Simulators, closed forms, quadrature, and schedulers for the age of computing
in communication-and-computation tandem networks: an exact continuous-time
FCFS tandem simulator, exponential-tandem closed forms and approximations,
a general-tandem quadrature engine over tabulated densities, a
freshness-throughput Pareto explorer, and a slotted multi-source Max-Weight
scheduling simulator, all reproducible from counter-based random streams.
"""

__version__ = "0.1.0"

from .dists import DistributionSpec, RngStream, density_grid, make_stream, parse_dist, sample
from .errors import ConfigError, NumericError, StabilityError
from .gg import (GGInputs, estimate_joint_grids, eta1, eta2, exponential_inputs,
                 ft_cdf, g1_quadrature, g2_quadrature, theta_hard_gg1_approx,
                 theta_soft_gg1, throughput_gg1_approx)
from .grids import DensityGrid, DensityGrid2D, read_grid_csv, write_grid_csv
from .mm1 import (MM1Params, MomentInputs, aoi_mm1_tandem, epsilon_w,
                  geometric_cycle_moments, mean_delay_given_valid,
                  theta_hard_from_moments, theta_hard_mm1_approx,
                  theta_soft_from_moments, theta_soft_mm1, throughput_mm1_approx)
from .pareto import ParetoPoint, ParetoQuery, frontier, minimize_theta, weak_pareto_check
from .slotted import (DriftProbe, SlottedConfig, SlottedResult, SlottedState,
                      aoc_hard_next, aoc_soft_next, choose_action, drift_probe,
                      replay_c_sequence, run_slotted, step, weight_hard, weight_soft,
                      write_trace_csv)
from .stats import gap_significantly_positive, mean_ci, ordering_not_contradicted
from .tandem import (AoCAccumulator, PhysicalParams, TandemConfig, TandemResult,
                     TaskRecord, empirical_epsilon, empirical_throughput,
                     hard_cycle_area, run_tandem, simulate_path,
                     soft_area_increment, write_task_log)

__all__ = [name for name in dir() if not name.startswith("_")]
