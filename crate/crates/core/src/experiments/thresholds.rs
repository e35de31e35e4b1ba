//! Pass/fail thresholds of the demo checks.

/// Published lower bounds for the convex transport instance, orders 1..=7.
pub const CONVEX_OT_REFERENCE: [f64; 7] = [
    0.22222, 0.23494, 0.23725, 0.23742, 0.23743, 0.23745, 0.23746,
];
pub const CONVEX_OT_TOL: f64 = 1e-3;
/// Tighter tolerance for orders up to [`CONVEX_OT_TIGHT_MAX_ORDER`].
pub const CONVEX_OT_TOL_TIGHT: f64 = 5e-4;
pub const CONVEX_OT_TIGHT_MAX_ORDER: usize = 4;

pub const NONCONVEX_OT_ORDER: usize = 6;
pub const NONCONVEX_OT_BOUND: (f64, f64) = (0.2450, 0.24775);
pub const NONCONVEX_OT_MOMENT_TOL: f64 = 5e-3;

/// Lower-trace property: `trace M_s(phi) >= trace M_s(mu) - slack`.
pub const TRACE_SLACK: f64 = 1e-6;
pub const TRACE_WINDOW: usize = 2;
pub const TRACE_TRIALS: usize = 20;

pub const CONVERGENCE_TOL: f64 = 5e-3;
pub const CONVERGENCE_SLACK: f64 = 1e-4;

/// Exact-moment extraction of a constant graph: error within this many y steps.
pub const CONSTANT_GRAPH_STEPS: f64 = 2.0;

pub const STEP_COMPLETED_ORDER: usize = 12;
pub const STEP_COARSE_ORDER: usize = 4;
pub const STEP_COMPLETED_L1: f64 = 0.08;
/// Kernel degree used for the all-moments comparison.
pub const STEP_EXACT_DEGREE: usize = 4;
pub const STEP_EXACT_L1: f64 = 0.03;

pub const LMOMENT_ORDER: usize = 10;
pub const LMOMENT_BETA: f64 = 1e-6;
pub const LMOMENT_LOW: f64 = 0.1;
pub const LMOMENT_HIGH: f64 = 0.9;
pub const LMOMENT_MARGIN: f64 = 0.02;
pub const LMOMENT_MISCLASSIFIED: f64 = 0.06;
pub const LMOMENT_SET: [(f64, f64); 2] = [(0.2, 0.4), (0.6, 0.8)];
