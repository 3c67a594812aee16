//! Monte Carlo estimation over replicas.

pub mod convergence;
pub mod holding;
pub mod moments;
pub mod observables;
pub mod replicas;

pub use convergence::{
    convergence_study, least_squares, ConvergenceReport, ConvergenceRow, ConvergenceStudy, Quantity,
};
pub use holding::{analytic_mean_holding, holding_time_study, HoldingRow};
pub use moments::{MomentAccumulator, TimeAverage};
pub use observables::{
    Components, Constant, FirstAndSecond, FnObservable, MeanSquare, Observable, SquaredComponents,
};
pub use replicas::{
    estimate_fixed_time, estimate_fixed_time_and_path_integral, estimate_path_integral, run_replicas,
    Estimate, PathIntegral,
};
