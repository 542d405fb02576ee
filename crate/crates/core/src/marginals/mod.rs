//! Reduced density matrices, partial traces, distances and factorization
//! diagnostics.

mod density;
mod diagnostics;
mod metrics;

#[cfg(test)]
pub(crate) use density::max_abs;
pub use density::{
    partial_trace, reduce_marginal, trace_last, trace_x, DensityMatrix, ReducedZDensity, TraceMode, Traced,
    DENSE_LIMIT,
};
pub use diagnostics::{
    factorization_gap, limiting_structure_gap, sector_project_density, sector_weights, sector_weights_marginal,
    SectorWeight,
};
pub use metrics::{dk_metric, dk_metric_z, hs_distance, trace_distance, Marginal, MetricConfig, TestOperator};
