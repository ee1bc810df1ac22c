"""Giant-vortex reduced models for rotating condensates in anharmonic traps."""
from .model import (ModelParams, PhysicalParams, TFProfile, annulus_bounds, rescale_to_dimensionless,
                    rescale_to_physical, tf_profile, trap_potential_w)
from .numerics import Grid1D, Profile1D, make_grid, normalize
from .gv_solver import (ConvergenceError, EnergyBreakdown, Solution1D, SolverOptions, minimize_gv,
                        minimize_gv_beta)
from .phase_opt import OptimalPhase, optimize_beta
from .critical import CriticalSpeedResult, g_map, solve_critical_speed
from .cost import bulk_region, cost_function_eps, cost_function_gv

__version__ = "0.1.0"
