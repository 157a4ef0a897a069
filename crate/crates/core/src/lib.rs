//! Minimal weighted L² integrals of holomorphic (1,0)-forms with jet
//! interpolation on the unit disc and its Möbius images.

pub mod analysis;
pub mod error;
pub mod forms;
pub mod gain;
pub mod geometry;
pub mod integrate;
pub mod polar;
pub mod problem;
pub mod report;
pub mod solver;
pub mod weights;

pub use error::{Error, Result};
pub use gain::{GainFunction, RatioProbe, RatioTrend};
pub use geometry::{
    blaschke_factor, green_disc, green_domain, log_capacity, sublevel_member, ComplexPoint, DomainSpec,
    MarkedPoint,
};
pub use polar::{QuadratureConfig, Region};
pub use weights::{PhiSpec, PsiSpec, WeightData, WeightPair};
pub use solver::{extension_bound, minimal_integral, Method, MinimalIntegralResult, SolveOptions};
pub use analysis::{
    criterion_check, extremal_candidate, linear_restriction_identity, scan_g, suita_compare, verify_mass,
    verify_orthogonality, ConcavityReport, CriterionReport, SuitaReport,
};
pub use problem::Problem;
