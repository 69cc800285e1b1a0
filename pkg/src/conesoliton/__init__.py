"""Rotationally symmetric shrinking solitons asymptotic to regular cones.

The package constructs the soliton profiles by backward shooting, evolves
the induced self-similar backwards Ricci flow, evaluates the two Carleman
weight families on it, and measures the difference system of two flows.
Each stage exposes residual and inequality checks against closed forms,
independent finite-difference oracles, or frozen reference fixtures.
"""

from .errors import (ConeSolitonError, ConfigError, ConvergenceError,
                     DomainError, FitError, GaugeError, InvalidFieldError,
                     ParameterError, ResamplingError, SingularInputError,
                     SupportError)
from .geometry import (ConeSpec, CurvaturePointData, WarpedMetricField,
                       cone_deviation, cone_field, curvature_arrays,
                       gaussian_field, hessian_of_radial, load_field,
                       normalization_residual, radial_distance,
                       ricci_of_field, save_field, soliton_residual)
from .soliton import (ExpansionFit, SolitonProfile, construct_soliton,
                      fit_asymptotics, gauge_by_potential, load_profile,
                      metric_soliton_rhs, normalize_potential, ode_residual,
                      potential_slope, save_profile, shoot_profile,
                      to_radial_chart)
from .flow import (FlowMap, FlowSnapshot, TrajectoryRecord, curvature_decay,
                   load_snapshot_bundle, required_source_radius,
                   save_snapshot_bundle, snapshot, snapshot_family,
                   trajectory, trajectory_threshold, verify_fid0,
                   verify_flow_identities, verify_hder, verify_rh_comparison)
from .weights import (BackheatReport, G1Params, G2BoundsReport, G2Params,
                      SigmaEval, WeightEvaluation, check_f1_backheat,
                      check_g2_bounds, g1_evaluate, g2_evaluate, sigma_a)
from .carleman import (Alpha0Report, BatteryReport, CarlemanTestResult,
                       CutoffResult, TestSection, alpha0_scan, build_cutoff,
                       carleman_decay_ode_test, carleman_decay_pde_test,
                       carleman_ode_test, carleman_pde_test,
                       make_standard_battery, run_battery, scan_thresholds)
from .differences import (DecayReport, DifferenceFields, EmpiricalBound,
                          SymmetryReport, check_decay, check_ode_inequalities,
                          check_symmetry, difference_fields,
                          equivalence_factor, save_diff_report,
                          verify_metric_evolution)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
