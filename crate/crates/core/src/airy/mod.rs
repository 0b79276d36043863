//! Airy function, Airy kernels, the Tracy-Widom distribution and counting
//! statistics of the Airy point process.

pub mod counting;
pub mod function;
pub mod kernel;
pub mod quadrature;

pub use counting::{
    count_statistics, expected_count, expected_count_exact, point_location_test, CountStats,
    PointSample, KAPPA,
};
pub use function::{airy_ai, airy_ai_prime, airy_pair};
pub use kernel::{
    extended_kernel_eval, kernel_by_quadrature, kernel_eval, tracy_widom_cdf, KernelEvaluator,
    TracyWidomTable,
};
