//! Exact certificates for small measurement matrices: null space properties,
//! concentration sets, admissible down-weights, restricted isometry and
//! orthogonality constants, and an LP oracle for weighted basis pursuit.

mod lp;
mod nsp;
mod recovery;
mod ric;
mod vertices;

pub use lp::{l1_min_exact, l1_min_exact_report, LpSolution, PIVOT_TOL};
pub use nsp::{
    check_nsp, check_wnsp, compute_t0, gamma_interval, gamma_interval_from, nsp_holds_at_scale, top_k_mass,
    GammaInterval, NspReport, NspWitness, RicBudget, T0Report, MARGIN_TOL, UNIQUENESS_TOL,
};
pub use recovery::{recovery_trial, recovery_trials, RecoveryOutcome, SupportPolicy, RECOVERY_TOL};
pub use ric::{
    ak_bound_table, compute_ric, compute_roc, order_k_bound_table, order_k_range, roc_work, weighted_ric_bound,
    weighted_ric_bound_order_k, AkBoundRow, OrderKBoundRow, OrderKRange, RicValue, RocValue, AK_TABLE_GAMMAS,
    DEFAULT_ENUMERATION_CAP, ORDER_K_TABLE,
};
pub use vertices::{l1ball_section_vertices, VertexSet};
