"""Radial-grid simulation and eigenvalue-spectrum event detection."""

from .netmodel import (
    Edge,
    IncidenceMatrix,
    NetworkGraph,
    NetworkStructureError,
    WeightedLaplacian,
    build_incidence,
    chain_network,
    common_path_matrix,
    common_path_weight,
    nodal_admittance,
    path_to_reference,
    random_tree_network,
    reduced_laplacian,
    star_network,
    weighted_laplacian,
)
from .powerflow import (
    PowerInjection,
    VoltageState,
    exact_injection,
    linear_forward,
    linear_inverse,
    linear_inverse_window,
    linearization_residual,
)
from .stochastics import (
    CovarianceSet,
    LoadModel,
    SampleSeries,
    analytic_covariances,
    closed_form_voltage_variance,
    current_to_power_covariance,
    empirical_covariance,
    flat_voltage_jacobian,
    propagate_covariance,
    sample_loads,
)
from .events import (
    EVENT_CLASSES,
    EVENT_PRESETS,
    EventPreset,
    EventSpec,
    PerturbationMatrix,
    apply_event,
    compensation_source,
    from_preset,
    impedance_matrix,
    perturbation_matrix,
)
from .rmtdetect import (
    Calibration,
    ClassSignature,
    CriteriaTriple,
    DegenerateColumnError,
    DetectionReport,
    StandardizedWindow,
    covariance_spectrum,
    criteria,
    detect_and_classify,
    localize,
    mp_bounds,
    ring_spectrum,
    standardize,
    whiten,
)
from .harness import (
    ConfigError,
    ScenarioConfig,
    ScenarioError,
    SweepRow,
    SweepTable,
    calibrate,
    export_report,
    export_spectrum,
    load_network,
    load_report,
    parse_config,
    parse_config_text,
    read_spectrum,
    run_scenario,
    scenario_from_config,
    simulate_window,
    sweep,
    whitened_spectrum,
)

__version__ = "0.1.0"
