//! Weighted sparse approximation: weighted thresholding projections, the
//! iterative hard weighted thresholding solver (IHWT), greedy baselines,
//! weighted restricted isometry estimates and a seeded experiment harness.
//!
//! ```
//! use wsparse::{exact_weighted_threshold, ProjectionMode, Signal, SupportBudget, WeightVector};
//!
//! let x = Signal::new(vec![9.0, 9.0, 10.0]).unwrap();
//! let w = WeightVector::new(vec![1.0, 2f64.sqrt(), 3f64.sqrt()]).unwrap();
//! let z = exact_weighted_threshold(&x, &w, SupportBudget::from(3usize), ProjectionMode::ExactDp).unwrap();
//! assert_eq!(z.as_slice(), &[9.0, 9.0, 0.0]);
//! ```

pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod plot;
pub mod sensing;
pub mod signal_models;
pub mod solvers;
pub mod sparsity;
pub mod thresholding;

pub use combinatorics::{
    count_supports, distinct_partition_count, enumerate_supports, max_support_size, BigCount,
    CountMode, SupportBudget,
};
pub use error::{Error, Result};
pub use sensing::{
    check_rip_bounds, gaussian_matrix, rip_constant, spectral_norm, MatrixScaling, RipEstimate,
    SensingMatrix,
};
pub use signal_models::{
    best_ws_prefix, block_weights, gaussian_noise, power_law_signal, sparse_truncate,
    PowerLawParams,
};
pub use solvers::{cosamp, ihwt, iht, omp, SolverConfig, SolverTrace, TraceDetail};
pub use sparsity::{
    support_of, weighted_cardinality, weighted_l0, weighted_lp, MeasurementVector, Signal,
    SupportSet, WeightVector,
};
pub use thresholding::{
    exact_weighted_threshold, hard_threshold, surrogate_weighted_threshold, ProjectionMode,
};
